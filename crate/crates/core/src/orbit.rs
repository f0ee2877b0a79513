//! Monte Carlo orbit ensembles: Birkhoff averages, occupation fractions near
//! the neutral fixed point, and the rescaled double-limit table.
//!
//! Orbits are embarrassingly parallel; every orbit derives its own
//! counter-seeded generator from `(seed, orbit_id)`, and ensemble reductions
//! run in fixed orbit order, so output is bitwise reproducible regardless of
//! thread count.

use crate::error::{Error, Result};
use crate::maps::LsvMap;
use crate::parallel;
use crate::potential::Potential;

/// SplitMix64: tiny, splittable, deterministic across platforms.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// Independent stream for one orbit of an ensemble.
    pub fn for_orbit(seed: u64, orbit_id: u64) -> Self {
        let mut g = Self::new(seed ^ (orbit_id.wrapping_add(1)).wrapping_mul(GOLDEN));
        // Decorrelate nearby seeds.
        g.next_u64();
        g.next_u64();
        g
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1) with 53-bit resolution.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum InitialLaw {
    /// Uniform on [0, 1].
    UnitInterval,
    /// Uniform on the inducing domain [1/2, 1].
    InducingDomain,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct OrbitEnsembleConfig {
    pub alpha: f64,
    pub n_steps: usize,
    pub n_orbits: usize,
    pub seed: u64,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
    #[serde(default = "default_initial_law")]
    pub initial_law: InitialLaw,
}

fn default_burn_in() -> usize {
    1000
}

fn default_initial_law() -> InitialLaw {
    InitialLaw::UnitInterval
}

impl OrbitEnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_steps == 0 || self.n_orbits == 0 {
            return Err(Error::Config("n_steps and n_orbits must be >= 1".into()));
        }
        Ok(())
    }
}

/// Ensemble statistics of per-orbit time averages.
#[derive(Debug, Clone, serde::Serialize)]
pub struct EnsembleStats {
    pub mean: f64,
    /// Sample standard error across orbits.
    pub std_error: f64,
    pub median: f64,
    pub per_orbit: Vec<f64>,
    /// Orbits that hit the 1e-300 floor near the fixed point.
    pub floored_orbits: usize,
}

fn summarize(per_orbit: Vec<f64>, floored: usize) -> EnsembleStats {
    let n = per_orbit.len() as f64;
    let mean = per_orbit.iter().sum::<f64>() / n;
    let var = if per_orbit.len() > 1 {
        per_orbit
            .iter()
            .map(|v| (v - mean) * (v - mean))
            .sum::<f64>()
            / (n - 1.0)
    } else {
        0.0
    };
    let mut sorted = per_orbit.clone();
    sorted.sort_by(f64::total_cmp);
    let median = if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2]
    } else {
        0.5 * (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2])
    };
    EnsembleStats {
        mean,
        std_error: (var / n).sqrt(),
        median,
        per_orbit,
        floored_orbits: floored,
    }
}

/// Orbit state with the laminar-phase compensation carried across steps.
struct OrbitState {
    x: f64,
    carry: f64,
    floored: bool,
}

impl OrbitState {
    fn start(x0: f64) -> Self {
        Self {
            x: x0,
            carry: 0.0,
            floored: false,
        }
    }

    #[inline]
    fn step(&mut self, map: &LsvMap) {
        if self.x > 0.5 {
            // The right branch doubles and shifts; exact in floating point.
            self.x = 2.0 * self.x - 1.0;
            self.carry = 0.0;
        } else {
            let (x, c) = map.laminar_step(self.x, self.carry);
            self.x = x;
            self.carry = c;
        }
        if self.x < 1e-300 {
            self.x = 1e-300;
            self.carry = 0.0;
            self.floored = true;
        }
    }
}

fn initial_point(cfg: &OrbitEnsembleConfig, rng: &mut SplitMix64) -> f64 {
    match cfg.initial_law {
        InitialLaw::UnitInterval => rng.next_f64(),
        InitialLaw::InducingDomain => 0.5 + 0.5 * rng.next_f64(),
    }
}

/// Ensemble Birkhoff averages `(1/n) sum phi(f^i x)` after burn-in.
pub fn birkhoff_average(cfg: &OrbitEnsembleConfig, phi: &Potential) -> Result<EnsembleStats> {
    cfg.validate()?;
    let map = LsvMap::lsv(cfg.alpha)?;
    let results = parallel::map_indexed(cfg.n_orbits, |orbit| {
        let mut rng = SplitMix64::for_orbit(cfg.seed, orbit as u64);
        let mut st = OrbitState::start(initial_point(cfg, &mut rng));
        for _ in 0..cfg.burn_in {
            st.step(&map);
        }
        let mut acc = 0.0f64;
        let mut comp = 0.0f64;
        for _ in 0..cfg.n_steps {
            // Kahan-compensated accumulation of phi along the orbit.
            let v = phi.eval(st.x);
            let t = acc + v;
            comp += if acc.abs() >= v.abs() {
                (acc - t) + v
            } else {
                (v - t) + acc
            };
            acc = t;
            st.step(&map);
        }
        ((acc + comp) / cfg.n_steps as f64, st.floored)
    });
    let floored = results.iter().filter(|r| r.1).count();
    Ok(summarize(
        results.into_iter().map(|r| r.0).collect(),
        floored,
    ))
}

/// Ensemble fraction of time spent in `[0, radius)`.
pub fn occupation_near_zero(cfg: &OrbitEnsembleConfig, radius: f64) -> Result<EnsembleStats> {
    cfg.validate()?;
    if !(0.0 < radius && radius <= 1.0) {
        return Err(Error::Config(format!(
            "radius must be in (0, 1], got {radius}"
        )));
    }
    let map = LsvMap::lsv(cfg.alpha)?;
    let results = parallel::map_indexed(cfg.n_orbits, |orbit| {
        let mut rng = SplitMix64::for_orbit(cfg.seed, orbit as u64);
        let mut st = OrbitState::start(initial_point(cfg, &mut rng));
        for _ in 0..cfg.burn_in {
            st.step(&map);
        }
        let mut hits = 0u64;
        for _ in 0..cfg.n_steps {
            if st.x < radius {
                hits += 1;
            }
            st.step(&map);
        }
        (hits as f64 / cfg.n_steps as f64, st.floored)
    });
    let floored = results.iter().filter(|r| r.1).count();
    Ok(summarize(
        results.into_iter().map(|r| r.0).collect(),
        floored,
    ))
}

/// Occupation frequencies over a uniform partition of [0, 1], one orbit per
/// ensemble member, reduced in fixed order.
pub fn occupation_histogram(cfg: &OrbitEnsembleConfig, cells: usize) -> Result<Vec<f64>> {
    cfg.validate()?;
    if cells == 0 {
        return Err(Error::Config("cells must be >= 1".into()));
    }
    let map = LsvMap::lsv(cfg.alpha)?;
    let per_orbit = parallel::map_indexed(cfg.n_orbits, |orbit| {
        let mut rng = SplitMix64::for_orbit(cfg.seed, orbit as u64);
        let mut st = OrbitState::start(initial_point(cfg, &mut rng));
        for _ in 0..cfg.burn_in {
            st.step(&map);
        }
        let mut counts = vec![0u64; cells];
        for _ in 0..cfg.n_steps {
            let c = ((st.x * cells as f64) as usize).min(cells - 1);
            counts[c] += 1;
            st.step(&map);
        }
        counts
    });
    let total = (cfg.n_steps * cfg.n_orbits) as f64;
    let mut freq = vec![0.0f64; cells];
    for counts in per_orbit {
        for (f, c) in freq.iter_mut().zip(counts) {
            *f += c as f64;
        }
    }
    for f in freq.iter_mut() {
        *f /= total;
    }
    Ok(freq)
}

/// One row of the rescaled double-limit table.
#[derive(Debug, Clone, serde::Serialize)]
pub struct EsslimRow {
    pub alpha: f64,
    pub n_steps: usize,
    /// Ensemble median of `((1/n) sum phi(f^i x) - phi(0)) / (alpha - 1)`.
    pub median_quotient: f64,
    pub mean_quotient: f64,
    pub std_error: f64,
    /// `|median_quotient - analytic_target|`.
    pub gap_to_target: f64,
}

/// Demonstrates the double limit: for each alpha the inner (time) limit of
/// the centered rescaled Birkhoff average, then the outer trend toward the
/// analytic target. Output is a convergence table, not a pass/fail check;
/// the ensemble spread of the inner limit is reported per row.
pub fn esslim_demo(
    phi: &Potential,
    alpha_grid: &[f64],
    n_schedule: &[usize],
    n_orbits: usize,
    seed: u64,
    analytic_target: f64,
) -> Result<Vec<EsslimRow>> {
    if alpha_grid.iter().any(|&a| a >= 1.0 || a <= 0.0) {
        return Err(Error::Config("esslim grid must lie in (0, 1)".into()));
    }
    if n_schedule.is_empty() || n_orbits == 0 {
        return Err(Error::Config(
            "schedule and ensemble must be non-empty".into(),
        ));
    }
    let mut schedule = n_schedule.to_vec();
    schedule.sort_unstable();
    let n_max = *schedule.last().unwrap();

    let mut rows = Vec::new();
    for &alpha in alpha_grid {
        let map = LsvMap::lsv(alpha)?;
        // One pass per orbit to n_max, recording running averages at each
        // checkpoint.
        let per_orbit: Vec<Vec<f64>> = parallel::map_indexed(n_orbits, |orbit| {
            let mut rng = SplitMix64::for_orbit(seed, orbit as u64);
            let mut st = OrbitState::start(rng.next_f64());
            for _ in 0..default_burn_in() {
                st.step(&map);
            }
            let mut acc = 0.0f64;
            let mut checkpoints = Vec::with_capacity(schedule.len());
            let mut next = 0usize;
            for step in 1..=n_max {
                acc += phi.eval(st.x);
                st.step(&map);
                if next < schedule.len() && step == schedule[next] {
                    checkpoints.push(acc / step as f64);
                    next += 1;
                }
            }
            checkpoints
        });
        for (ci, &n) in schedule.iter().enumerate() {
            let quotients: Vec<f64> = per_orbit
                .iter()
                .map(|cps| (cps[ci] - phi.value_at_zero) / (alpha - 1.0))
                .collect();
            let stats = summarize(quotients, 0);
            rows.push(EsslimRow {
                alpha,
                n_steps: n,
                median_quotient: stats.median,
                mean_quotient: stats.mean,
                std_error: stats.std_error,
                gap_to_target: (stats.median - analytic_target).abs(),
            });
        }
    }
    Ok(rows)
}
