//! Response curves across the finite/infinite-measure transition.
//!
//! Two independent routes compute `int (phi - phi(0)) d nu_alpha`:
//! a branch-sum integrand on Y built from cached inverse branches, and a
//! forward-pushforward quadrature over return-time cylinders. Kac sums turn
//! these into physical-measure integrals below the transition, and a
//! Richardson-extrapolated difference quotient probes the one-sided
//! derivative at the transition point.

use crate::density::{DensityApprox, DensitySolver, Start};
use crate::error::{Error, Result};
use crate::induced::{log_spaced, InducedSystem};
use crate::interp::Cubic;
use crate::maps::LsvMap;
use crate::parallel;
use crate::potential::Potential;
use crate::tail::{fit_tail, kac_sum, KacSum, TailProfile};
use crate::zeta::zeta_tail;

/// One SRB integral with its truncation bookkeeping. `value` includes the
/// extrapolated tail correction; `declared_tail_bound` bounds what the
/// correction can still be missing.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SrbIntegral {
    pub potential: String,
    pub value: f64,
    pub tail_correction: f64,
    pub declared_tail_bound: f64,
    pub k_used: usize,
}

/// Extrapolates `sum_{k > k_used}` of per-k magnitudes from fitted samples.
/// Returns (signed correction, declared bound). Conservative when the fit is
/// unusable: zero correction, bound from the crudest summable envelope.
fn tail_from_samples(ks: &[usize], terms: &[f64], k_used: usize) -> Result<(f64, f64)> {
    let mag: Vec<f64> = terms.iter().map(|t| t.abs()).collect();
    let peak = mag.iter().cloned().fold(0.0f64, f64::max);
    if peak == 0.0 {
        return Ok((0.0, 0.0));
    }
    let usable: Vec<(usize, f64)> = ks
        .iter()
        .zip(&mag)
        .filter(|(_, &m)| m > 1e-300)
        .map(|(&k, &m)| (k, m))
        .collect();
    if usable.len() < 6 {
        return Ok((0.0, peak * k_used as f64));
    }
    let pts: Vec<(f64, f64)> = usable
        .iter()
        .map(|&(k, m)| ((k as f64).ln(), m.ln()))
        .collect();
    let q = -crate::maps::least_squares_slope(&pts);
    if !(q > 1.01) {
        return Err(Error::Domain(format!(
            "branch-sum tail not summable: fitted decay exponent {q:.3}"
        )));
    }
    // Anchor the power law at the last sample.
    let (k_last, m_last) = *usable.last().unwrap();
    let level = m_last * (k_last as f64).powf(q);
    let tail_mag = level * zeta_tail(q, k_used)?;
    let mixed_signs = terms.iter().any(|&t| t > 0.0) && terms.iter().any(|&t| t < 0.0);
    if mixed_signs {
        // No signed extrapolation for oscillating tails: the whole magnitude
        // becomes part of the declared bound instead.
        return Ok((0.0, tail_mag));
    }
    let sign = terms.last().unwrap().signum();
    Ok((sign * tail_mag, 0.0))
}

/// Tail-corrected value at truncation `k_used` from per-k integral samples:
/// fit the decay over `[k_used/8, k_used]` and extrapolate. Returns
/// `(value, correction, fit_fallback_bound)`.
fn corrected_value(
    partial: f64,
    sample_ks: &[usize],
    term_ints: &[f64],
    k_used: usize,
) -> Result<(f64, f64, f64)> {
    let lo = (k_used / 8).max(2);
    let mut ks = Vec::new();
    let mut ts = Vec::new();
    for (&k, &t) in sample_ks.iter().zip(term_ints) {
        if k >= lo && k <= k_used {
            ks.push(k);
            ts.push(t);
        }
    }
    let (corr, fallback) = tail_from_samples(&ks, &ts, k_used)?;
    Ok((partial + corr, corr, fallback))
}

/// Declared bound on the error of the tail-corrected value at the full
/// truncation, from drift against the half-truncation evaluation. The drift
/// shrinks geometrically in the truncation level (measured ratio ~ 0.5), so
/// 1.5x the last increment covers the remainder.
fn drift_bound(value_full: f64, value_half: f64, fallback: f64) -> f64 {
    1.5 * (value_full - value_half).abs() + fallback + 1e-12 * (value_full.abs() + 1.0)
}

/// Branch-sum route: integrates
/// `g(x) = sum_k G_k(x) [ sum_{l<k} psi(f_left^{-l} x) + psi(F_k^{-1} x) ] h(F_k^{-1} x)`
/// over Y against lambda~, for every potential in one backward pass.
///
/// The k-sum runs to the cache's k_max with the remainder extrapolated from
/// the fitted decay of the per-k integrals; the declared bound is calibrated
/// by re-evaluating at half the truncation.
pub fn srb_integral(
    solver: &DensitySolver,
    density: &DensityApprox,
    potentials: &[Potential],
) -> Result<Vec<SrbIntegral>> {
    let np = potentials.len();
    let k_max = solver.cache.k_max;
    let k_half = k_max / 2;
    let nodes = &solver.nodes;
    let sample_ks = log_spaced((k_max / 16).max(2), k_max, 32);

    struct NodeOut {
        g: Vec<f64>,
        g_half: Vec<f64>,
        sampled: Vec<f64>, // sample_ks.len() * np
    }

    let h = density.interpolant();
    let rows: Vec<NodeOut> = parallel::map_indexed(nodes.len(), |i| {
        let (pos, wgt) = solver.cache.row(i);
        let mut g = vec![0.0f64; np];
        let mut g_half = vec![0.0f64; np];
        let mut prefix = vec![0.0f64; np];
        let mut sampled = vec![0.0f64; sample_ks.len() * np];
        let mut next_sample = 0usize;
        for k in 1..=k_max {
            let p = pos[k - 1];
            let w = wgt[k - 1];
            let hval = h.eval(p);
            let is_sample = next_sample < sample_ks.len() && sample_ks[next_sample] == k;
            for (t, phi) in potentials.iter().enumerate() {
                let term = w * (prefix[t] + phi.centered(p)) * hval;
                g[t] += term;
                if k <= k_half {
                    g_half[t] += term;
                }
                if is_sample {
                    sampled[next_sample * np + t] = term;
                }
            }
            if is_sample {
                next_sample += 1;
            }
            if k < k_max {
                let z = 2.0 * pos[k] - 1.0;
                for (t, phi) in potentials.iter().enumerate() {
                    prefix[t] += phi.centered(z);
                }
            }
        }
        NodeOut { g, g_half, sampled }
    });

    let mut out = Vec::with_capacity(np);
    for (t, phi) in potentials.iter().enumerate() {
        let g_vals: Vec<f64> = rows.iter().map(|r| r.g[t]).collect();
        let g_half_vals: Vec<f64> = rows.iter().map(|r| r.g_half[t]).collect();
        let partial = 2.0 * Cubic::new(nodes.clone(), g_vals)?.total_integral();
        let partial_half = 2.0 * Cubic::new(nodes.clone(), g_half_vals)?.total_integral();
        // Per-k integrals at the sampled ks, for tail extrapolation.
        let mut term_ints = Vec::with_capacity(sample_ks.len());
        for (j, _) in sample_ks.iter().enumerate() {
            let vals: Vec<f64> = rows.iter().map(|r| r.sampled[j * np + t]).collect();
            term_ints.push(2.0 * Cubic::new(nodes.clone(), vals)?.total_integral());
        }
        let (value, corr, fb) = corrected_value(partial, &sample_ks, &term_ints, k_max)?;
        let (value_half, _, _) = corrected_value(partial_half, &sample_ks, &term_ints, k_half)?;
        out.push(SrbIntegral {
            potential: phi.name.clone(),
            value,
            tail_correction: corr,
            declared_tail_bound: drift_bound(value, value_half, fb),
            k_used: k_max,
        });
    }
    Ok(out)
}

/// 8-point Gauss-Legendre nodes and weights on [-1, 1].
const GL8: [(f64, f64); 8] = [
    (-0.9602898564975363, 0.10122853629037626),
    (-0.7966664774136267, 0.22238103445337448),
    (-0.525_532_409_916_329, 0.31370664587788727),
    (-0.1834346424956498, 0.362_683_783_378_362),
    (0.1834346424956498, 0.362_683_783_378_362),
    (0.525_532_409_916_329, 0.31370664587788727),
    (0.7966664774136267, 0.22238103445337448),
    (0.9602898564975363, 0.10122853629037626),
];

/// Pushforward route (independent oracle): evaluates
/// `sum_k int_{C_k} [ sum_{n<k} psi(f^n z) ] h(z) dlambda~(z)`
/// by forward iteration over cylinder quadrature points. Uses only the
/// forward map and the cylinder endpoints: no inverse-branch compositions,
/// no chain-rule weights.
pub fn srb_integral_pushforward_oracle(
    sys: &InducedSystem,
    density: &DensityApprox,
    potentials: &[Potential],
    k_cap: usize,
    panels: usize,
) -> Result<Vec<SrbIntegral>> {
    if k_cap < 32 || k_cap > sys.yseq.max_index() {
        return Err(Error::Domain(format!(
            "oracle k_cap {k_cap} outside 32..={}",
            sys.yseq.max_index()
        )));
    }
    let np = potentials.len();
    let map = sys.map;
    let h = density.interpolant();

    // Per-cylinder signed contributions, one vector per potential.
    let per_k: Vec<Vec<f64>> = parallel::map_indexed(k_cap, |idx| {
        let k = idx + 1;
        let (a, b) = sys.cylinder(k);
        let mut acc = vec![0.0f64; np];
        let pw = (b - a) / panels as f64;
        for panel in 0..panels {
            let lo = a + panel as f64 * pw;
            let mid = lo + 0.5 * pw;
            let half = 0.5 * pw;
            for &(t, w) in &GL8 {
                let z = mid + half * t;
                let weight = w * half * 2.0 * h.eval(z); // lambda~ = 2 dx
                let mut v = z;
                let mut sums = vec![0.0f64; np];
                for step in 0..k {
                    for (p, phi) in potentials.iter().enumerate() {
                        sums[p] += phi.centered(v);
                    }
                    if step + 1 < k {
                        v = map.eval_unchecked(v);
                    }
                }
                for p in 0..np {
                    acc[p] += weight * sums[p];
                }
            }
        }
        acc
    });

    let k_half = k_cap / 2;
    let sample_ks = log_spaced((k_cap / 16).max(2), k_cap, 32);
    let mut out = Vec::with_capacity(np);
    for (p, phi) in potentials.iter().enumerate() {
        let partial: f64 = crate::interp::compensated_sum(per_k.iter().map(|row| row[p]));
        let partial_half: f64 =
            crate::interp::compensated_sum(per_k[..k_half].iter().map(|row| row[p]));
        let samples: Vec<f64> = sample_ks.iter().map(|&k| per_k[k - 1][p]).collect();
        let (value, corr, fb) = corrected_value(partial, &sample_ks, &samples, k_cap)?;
        let (value_half, _, _) = corrected_value(partial_half, &sample_ks, &samples, k_half)?;
        out.push(SrbIntegral {
            potential: phi.name.clone(),
            value,
            tail_correction: corr,
            declared_tail_bound: drift_bound(value, value_half, fb),
            k_used: k_cap,
        });
    }
    Ok(out)
}

/// Physical-measure integral: `phi(0) + srb/kac` below the transition, the
/// Dirac value `phi(0)` at and above it.
pub fn phy_integral(phi: &Potential, alpha: f64, srb: &SrbIntegral, kac: &KacSum) -> f64 {
    if alpha >= 1.0 {
        return phi.value_at_zero;
    }
    match kac.total() {
        Some(total) => phi.value_at_zero + srb.value / total,
        None => phi.value_at_zero,
    }
}

/// Pipeline configuration for per-alpha analysis.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ResponseConfig {
    pub grid_size: usize,
    pub k_max: usize,
    pub density_tol: f64,
    pub max_iter: usize,
    /// Log-spaced fit window for the tail profile.
    pub fit_window: (usize, usize),
    pub fit_points: usize,
    /// Truncation level of the Kac partial sum (zeta tail beyond).
    pub kac_n_max: usize,
}

impl Default for ResponseConfig {
    fn default() -> Self {
        Self {
            grid_size: 1024,
            k_max: 10_000,
            density_tol: 1e-10,
            max_iter: 2000,
            fit_window: (100, 10_000),
            fit_points: 40,
            kac_n_max: 100_000,
        }
    }
}

/// Everything the pipeline produces for one parameter value. The heavy node
/// cache is dropped on completion; records are cheap to keep.
#[derive(Debug, Clone)]
pub struct AlphaRecord {
    pub alpha: f64,
    pub h_half: f64,
    pub density_residual: f64,
    pub density_iterations: usize,
    pub tail: TailProfile,
    pub kac: KacSum,
    /// One entry per requested potential (branch-sum route).
    pub srb: Vec<SrbIntegral>,
    /// Physical-measure integrals per potential.
    pub r_phy: Vec<f64>,
    /// `(r_phy - phi(0)) / (alpha - 1)` per potential; empty at alpha >= 1.
    pub quotients: Vec<f64>,
}

/// Full per-alpha artifacts: the summary record, the solved density, and
/// (when requested) the pushforward-oracle integrals at `oracle_k_cap`.
pub struct AlphaAnalysis {
    pub record: AlphaRecord,
    pub density: DensityApprox,
    pub oracle_srb: Option<Vec<SrbIntegral>>,
}

/// Runs induced system -> density -> tail -> Kac -> integrals at one alpha,
/// keeping the solved density (the heavy branch cache is dropped on return).
pub fn analyze_alpha_detailed(
    alpha: f64,
    potentials: &[Potential],
    cfg: &ResponseConfig,
    oracle_k_cap: Option<usize>,
) -> Result<AlphaAnalysis> {
    let map = LsvMap::lsv(alpha)?;
    let yseq_len = cfg.kac_n_max.max(cfg.fit_window.1).max(cfg.k_max);
    let sys = InducedSystem::build(map, cfg.k_max, yseq_len)?;
    let solver = DensitySolver::new(&sys, cfg.grid_size)?;
    let density = solver.solve(cfg.density_tol, cfg.max_iter, Start::Flat)?;
    let tail = fit_tail(&density, &sys.yseq, cfg.fit_window, cfg.fit_points)?;
    let kac = kac_sum(&density, &sys.yseq, cfg.kac_n_max, &tail)?;
    let srb = srb_integral(&solver, &density, potentials)?;
    let oracle_srb = match oracle_k_cap {
        Some(cap) => Some(srb_integral_pushforward_oracle(
            &sys, &density, potentials, cap, 4,
        )?),
        None => None,
    };
    let r_phy: Vec<f64> = potentials
        .iter()
        .zip(&srb)
        .map(|(phi, s)| phy_integral(phi, alpha, s, &kac))
        .collect();
    let quotients: Vec<f64> = if alpha < 1.0 {
        potentials
            .iter()
            .zip(&r_phy)
            .map(|(phi, &r)| (r - phi.value_at_zero) / (alpha - 1.0))
            .collect()
    } else {
        Vec::new()
    };
    let record = AlphaRecord {
        alpha,
        h_half: density.h_half(),
        density_residual: density.residual,
        density_iterations: density.iterations,
        tail,
        kac,
        srb,
        r_phy,
        quotients,
    };
    Ok(AlphaAnalysis {
        record,
        density,
        oracle_srb,
    })
}

/// Runs induced system -> density -> tail -> Kac -> integrals at one alpha.
pub fn analyze_alpha(
    alpha: f64,
    potentials: &[Potential],
    cfg: &ResponseConfig,
) -> Result<AlphaRecord> {
    Ok(analyze_alpha_detailed(alpha, potentials, cfg, None)?.record)
}

/// Response curve over an alpha grid, one record per point.
#[derive(Debug, Clone)]
pub struct ResponseCurve {
    pub potentials: Vec<String>,
    pub records: Vec<AlphaRecord>,
}

/// Builds the per-alpha pipeline across a grid in `[alpha_min, 1)`; a failure
/// is annotated with the alpha at which it occurred.
pub fn build_response_curve(
    alpha_grid: &[f64],
    potentials: &[Potential],
    cfg: &ResponseConfig,
) -> Result<ResponseCurve> {
    if alpha_grid.is_empty() {
        return Err(Error::Domain("alpha grid must be non-empty".into()));
    }
    let mut records = Vec::with_capacity(alpha_grid.len());
    for &alpha in alpha_grid {
        let rec = analyze_alpha(alpha, potentials, cfg)
            .map_err(|e| Error::Config(format!("pipeline failed at alpha = {alpha}: {e}")))?;
        records.push(rec);
    }
    Ok(ResponseCurve {
        potentials: potentials.iter().map(|p| p.name.clone()).collect(),
        records,
    })
}

/// The geometric grid `1 - 2^{-j}` for j in `j_lo..=j_hi`.
pub fn geometric_alpha_grid(j_lo: u32, j_hi: u32) -> Vec<f64> {
    (j_lo..=j_hi)
        .map(|j| 1.0 - 2f64.powi(-(j as i32)))
        .collect()
}

/// One-sided derivative estimate at the transition from a quotient sequence
/// on the geometric grid, with Richardson extrapolation and the analytic
/// target `-int(phi - phi(0)) d nu_1 / c_1`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct DerivativeReport {
    pub potential: String,
    /// `(alpha_j, quotient_j)` in grid order.
    pub quotients: Vec<(f64, f64)>,
    /// Last raw quotient (closest alpha to 1).
    pub estimate: f64,
    /// Richardson-extrapolated limit.
    pub richardson: f64,
    pub analytic_target: f64,
    pub relative_gap: f64,
    /// Whether successive quotient differences shrink monotonically.
    pub converged: bool,
    pub c1: f64,
    pub h1_half: f64,
    pub integral_nu1: f64,
}

/// Richardson/Neville extrapolation for a sequence with error `O(2^{-j})` on
/// a grid halving toward the limit; returns the deepest corner value.
pub fn richardson_extrapolate(values: &[f64]) -> f64 {
    let n = values.len();
    assert!(n >= 1);
    let levels = n.min(5);
    let mut row: Vec<f64> = values[n - levels..].to_vec();
    let mut m = 1;
    while row.len() > 1 {
        let factor = 2f64.powi(m) - 1.0;
        row = row
            .windows(2)
            .map(|w| w[1] + (w[1] - w[0]) / factor)
            .collect();
        m += 1;
    }
    row[0]
}

pub fn one_sided_derivative(
    curve: &ResponseCurve,
    record_at_one: &AlphaRecord,
    potential_idx: usize,
) -> Result<DerivativeReport> {
    let name = curve
        .potentials
        .get(potential_idx)
        .ok_or_else(|| Error::Domain(format!("potential index {potential_idx} out of range")))?
        .clone();
    let mut quotients: Vec<(f64, f64)> = Vec::new();
    for rec in &curve.records {
        if rec.alpha < 1.0 {
            quotients.push((rec.alpha, rec.quotients[potential_idx]));
        }
    }
    if quotients.is_empty() {
        return Err(Error::Domain(
            "no quotient points below the transition".into(),
        ));
    }
    quotients.sort_by(|a, b| a.0.total_cmp(&b.0));
    let qs: Vec<f64> = quotients.iter().map(|&(_, q)| q).collect();
    let richardson = richardson_extrapolate(&qs);
    let estimate = *qs.last().unwrap();

    let c1 = record_at_one.tail.fitted_c;
    let s1 = record_at_one.srb[potential_idx].value;
    let analytic_target = -s1 / c1;
    // A vanishing target (constant potentials, calibrated combinations) is
    // matched when the extrapolated quotient vanishes at working precision.
    let relative_gap = if analytic_target.abs() > 1e-12 {
        (richardson - analytic_target).abs() / analytic_target.abs()
    } else if richardson.abs() <= 1e-8 {
        0.0
    } else {
        f64::INFINITY
    };

    // Fewer than three quotient points cannot exhibit monotone shrinkage;
    // such runs are flagged as unconverged.
    let diffs: Vec<f64> = qs.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let converged = diffs.len() >= 2
        && diffs
            .windows(2)
            .all(|w| w[1] <= w[0] * 1.05 + 1e-12 * qs.last().unwrap().abs().max(1e-300));

    Ok(DerivativeReport {
        potential: name,
        quotients,
        estimate,
        richardson,
        analytic_target,
        relative_gap,
        converged,
        c1,
        h1_half: record_at_one.h_half,
        integral_nu1: s1,
    })
}

/// SRB mass of `[0, t)` for `t <= 1/2` below the transition, via the
/// pushforward representation: `sum_{j >= 0} nu~([1/2, (1 + f_left^{-j}(t))/2))`
/// with a fitted zeta tail beyond `j_cap`.
pub fn srb_mass_below(map: &LsvMap, density: &DensityApprox, t: f64, j_cap: usize) -> Result<f64> {
    if map.params.alpha >= 1.0 {
        return Err(Error::Domain(
            "srb_mass_below needs alpha < 1 (infinite mass otherwise)".into(),
        ));
    }
    if !(0.0..=0.5).contains(&t) {
        return Err(Error::Domain(format!("t = {t} outside [0, 1/2]")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    if j_cap < 64 {
        return Err(Error::Domain("j_cap must be >= 64".into()));
    }
    let mut masses = Vec::with_capacity(j_cap + 1);
    let mut tj = t;
    for _ in 0..=j_cap {
        masses.push(density.mass_to(0.5 * (1.0 + tj)));
        tj = map.left_inverse_unchecked(tj);
    }
    let partial = crate::interp::compensated_sum(masses.iter().copied());
    // Tail model: the backward orbit obeys t_j ~ (alpha b (j + c0))^{-1/alpha}
    // and the summand is locally h_eff * t_j, so the remainder is a shifted
    // Hurwitz tail. The shift c0 and the local density scale h_eff are read
    // off the computed orbit, making the extrapolation exact to the orbit's
    // own second-order corrections.
    let alpha = map.params.alpha;
    let ab = alpha * map.params.b_alpha;
    let s = 1.0 / alpha;
    // `tj` now holds t_{j_cap + 1}; one forward step recovers t_{j_cap}.
    let c0 = tj.powf(-alpha) / ab - (j_cap + 1) as f64;
    let h_eff = masses[j_cap] / map.left(tj);
    let tail = h_eff * ab.powf(-s) * crate::zeta::hurwitz_tail(s, (j_cap + 1) as f64 + c0)?;
    Ok(partial + tail)
}

/// Normalized physical-measure mass of an interval `[a, b)` below the
/// transition (splits at 1/2; uses the pushforward CDF on the left and the
/// induced density on the right).
pub fn physical_interval_mass(
    map: &LsvMap,
    density: &DensityApprox,
    kac_total: f64,
    a: f64,
    b: f64,
    j_cap: usize,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) || a > b {
        return Err(Error::Domain(format!("bad interval [{a}, {b})")));
    }
    let left = |t: f64| -> Result<f64> { srb_mass_below(map, density, t.min(0.5), j_cap) };
    let mut nu = 0.0;
    if a < 0.5 {
        nu += left(b)? - left(a)?;
    }
    if b > 0.5 {
        let lo = a.max(0.5);
        nu += density.mass_to(b) - density.mass_to(lo);
    }
    Ok(nu / kac_total)
}
