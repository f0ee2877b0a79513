//! Acceptance suite: every release-gating check as a callable criterion.
//!
//! The integration test target `acceptance` asserts each criterion; the CLI
//! `reproduce` subcommand runs the same functions and prints one line per
//! criterion. Heavy per-alpha artifacts are built once and shared through an
//! internal memoized context, so the asserted thresholds stay pinned in one
//! place.

use crate::density::{ulam_l1_gap, ulam_oracle, DensitySolver, Start};
use crate::error::Result;
use crate::induced::InducedSystem;
use crate::maps::{check_y_asymptotics, y_sequence, LsvMap};
use crate::orbit::{birkhoff_average, occupation_near_zero, InitialLaw, OrbitEnsembleConfig};
use crate::potential::Potential;
use crate::response::{
    analyze_alpha_detailed, one_sided_derivative, richardson_extrapolate, AlphaAnalysis,
    ResponseConfig, ResponseCurve,
};
use crate::srb_integral;
use crate::tail::{abel_summation_sides, tail_mass};
use crate::zeta::zeta;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

/// Fixed ensemble seed for the simulation criterion.
pub const ENSEMBLE_SEED: u64 = 20_260_808;

#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub details: String,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "criterion {:02} [{}] {} :: {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.details
        )
    }
}

fn outcome(id: u8, name: &'static str, passed: bool, details: String) -> CriterionResult {
    CriterionResult {
        id,
        name,
        passed,
        details,
    }
}

/// Memoizing context over the per-alpha pipeline.
pub struct Acceptance {
    cfg: ResponseConfig,
    potentials: Vec<Potential>,
    cache: Mutex<HashMap<u64, Arc<AlphaAnalysis>>>,
    /// Truncation of the pushforward oracle (half the primary k_max).
    oracle_k_cap: usize,
}

impl Default for Acceptance {
    fn default() -> Self {
        Self::new()
    }
}

impl Acceptance {
    pub fn new() -> Self {
        let cfg = ResponseConfig::default();
        let oracle_k_cap = cfg.k_max / 2;
        Self {
            cfg,
            potentials: vec![
                Potential::x(),
                Potential::x_squared(),
                Potential::sqrt_x(),
                Potential::cos_two_pi(),
            ],
            cache: Mutex::new(HashMap::new()),
            oracle_k_cap,
        }
    }

    /// Potential indices in the shared list.
    const P_X: usize = 0;
    const P_X2: usize = 1;
    const P_SQRT: usize = 2;
    const P_COS: usize = 3;

    fn artifacts(&self, alpha: f64, with_oracle: bool) -> Result<Arc<AlphaAnalysis>> {
        let key = alpha.to_bits();
        if let Some(hit) = self.cache.lock().unwrap().get(&key) {
            if !with_oracle || hit.oracle_srb.is_some() {
                return Ok(hit.clone());
            }
        }
        let analysis = analyze_alpha_detailed(
            alpha,
            &self.potentials,
            &self.cfg,
            with_oracle.then_some(self.oracle_k_cap),
        )?;
        let arc = Arc::new(analysis);
        self.cache.lock().unwrap().insert(key, arc.clone());
        Ok(arc)
    }

    fn geometric_records(&self, j_lo: u32, j_hi: u32) -> Result<ResponseCurve> {
        let mut records = Vec::new();
        for j in j_lo..=j_hi {
            let alpha = 1.0 - 2f64.powi(-(j as i32));
            records.push(self.artifacts(alpha, false)?.record.clone());
        }
        Ok(ResponseCurve {
            potentials: self.potentials.iter().map(|p| p.name.clone()).collect(),
            records,
        })
    }

    /// Backward-orbit asymptotics: `sup_{n in [1e4, 1e5]} |y_n (a b n)^{1/a} - 1|`
    /// within 0.02 for alpha in {0.5, 0.8, 1, 1.25}, with decaying residuals.
    pub fn c01_y_asymptotics(&self) -> CriterionResult {
        let mut passed = true;
        let mut parts = Vec::new();
        for alpha in [0.5, 0.8, 1.0, 1.25] {
            let run = || -> Result<(f64, f64)> {
                let map = LsvMap::lsv(alpha)?;
                let seq = y_sequence(&map, 100_000)?;
                let diag = check_y_asymptotics(&seq, &map.params, (10_000, 100_000))?;
                Ok((
                    diag.max_scaled_deviation,
                    diag.fitted_correction_exponent.unwrap_or(f64::NAN),
                ))
            };
            match run() {
                Ok((dev, slope)) => {
                    let ok = dev <= 0.02 && slope < 0.0;
                    passed &= ok;
                    parts.push(format!("a={alpha}: sup|dev|={dev:.2e}, slope={slope:.2}"));
                }
                Err(e) => {
                    passed = false;
                    parts.push(format!("a={alpha}: error {e}"));
                }
            }
        }
        outcome(1, "y-sequence asymptotics", passed, parts.join("; "))
    }

    /// Fixed point of the induced transfer operator at alpha = 0.8:
    /// residual <= 1e-10 (grid 1024, k_max 1e4), positivity, second-start
    /// agreement <= 1e-9, Ulam L1 gap <= 5e-3 at 4096 cells and halving
    /// across the 1024 -> 4096 refinement.
    pub fn c02_fixed_point(&self) -> CriterionResult {
        let run = || -> Result<(f64, f64, f64, f64, f64, f64)> {
            let map = LsvMap::lsv(0.8)?;
            let sys = InducedSystem::build(map, self.cfg.k_max, self.cfg.k_max)?;
            let solver = DensitySolver::new(&sys, self.cfg.grid_size)?;
            let d = solver.solve(self.cfg.density_tol, self.cfg.max_iter, Start::Flat)?;
            let d2 = solver.solve(self.cfg.density_tol, self.cfg.max_iter, Start::Ramp)?;
            let start_diff = d
                .values
                .iter()
                .zip(&d2.values)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            let mut gaps = [0.0f64; 3];
            for (g, cells) in gaps.iter_mut().zip([1024usize, 2048, 4096]) {
                let u = ulam_oracle(&map, cells, 128, 1e-13, 50_000)?;
                *g = ulam_l1_gap(&d, &u);
            }
            Ok((
                d.residual,
                d.min_value(),
                start_diff,
                gaps[0],
                gaps[1],
                gaps[2],
            ))
        };
        match run() {
            Ok((residual, min_val, start_diff, g1024, g2048, g4096)) => {
                let ok = residual <= 1e-10
                    && min_val > 0.0
                    && start_diff <= 1e-9
                    && g4096 <= 5e-3
                    && g4096 <= 0.55 * g1024;
                outcome(
                    2,
                    "induced density fixed point",
                    ok,
                    format!(
                        "residual={residual:.2e}, min={min_val:.3}, start-diff={start_diff:.2e}, \
                         ulam gaps 1024/2048/4096 = {g1024:.2e}/{g2048:.2e}/{g4096:.2e} \
                         (4096 vs 1024 ratio {:.2})",
                        g4096 / g1024
                    ),
                )
            }
            Err(e) => outcome(
                2,
                "induced density fixed point",
                false,
                format!("error: {e}"),
            ),
        }
    }

    /// Tail expansion: fitted exponent within 2% of 1/alpha and fitted c
    /// within 3% of `h(1/2) (1/2) / (alpha 2^alpha)^(1/alpha)` for
    /// alpha in {0.6, 0.8, 1.0, 1.25}.
    pub fn c03_tail_expansion(&self) -> CriterionResult {
        let mut passed = true;
        let mut parts = Vec::new();
        for alpha in [0.6, 0.8, 1.0, 1.25] {
            match self.artifacts(alpha, false) {
                Ok(art) => {
                    let t = &art.record.tail;
                    let v_target = 1.0 / alpha;
                    let v_gap = (t.fitted_exponent - v_target).abs() / v_target;
                    let c_gap = (t.fitted_c - t.predicted_c).abs() / t.predicted_c;
                    let ok = v_gap <= 0.02 && c_gap <= 0.03;
                    passed &= ok;
                    parts.push(format!(
                        "a={alpha}: v={:.4} (gap {:.2}%), c={:.4} vs predicted {:.4} (ratio {:.3})",
                        t.fitted_exponent,
                        100.0 * v_gap,
                        t.fitted_c,
                        t.predicted_c,
                        t.fitted_c / t.predicted_c
                    ));
                }
                Err(e) => {
                    passed = false;
                    parts.push(format!("a={alpha}: error {e}"));
                }
            }
        }
        outcome(3, "return-time tail expansion", passed, parts.join("; "))
    }

    /// Kac sums against the zeta pole: `(1/a - 1) kac(a)` over the geometric
    /// grid j = 4..8 converges to the fitted c1 with difference ratios near
    /// 1/2 and final gap <= 5%; zeta spot values.
    #[allow(clippy::type_complexity)]
    pub fn c04_kac_zeta_pole(&self) -> CriterionResult {
        let run = || -> Result<(Vec<f64>, Vec<f64>, f64, f64, f64)> {
            let mut scaled = Vec::new();
            for j in 4..=8u32 {
                let alpha = 1.0 - 2f64.powi(-(j as i32));
                let rec = &self.artifacts(alpha, false)?.record;
                let total = rec.kac.total().expect("finite below transition");
                scaled.push((1.0 / alpha - 1.0) * total);
            }
            let c1 = self.artifacts(1.0, false)?.record.tail.fitted_c;
            let diffs: Vec<f64> = scaled.windows(2).map(|w| w[1] - w[0]).collect();
            let ratios: Vec<f64> = diffs.windows(2).map(|w| w[1] / w[0]).collect();
            let final_gap = (scaled.last().unwrap() - c1).abs() / c1;
            let zeta2_err = (zeta(2.0)? - PI * PI / 6.0).abs();
            let mut pole_worst = 0.0f64;
            for k in 1..=100 {
                let s = 1.0 + 1e-3 * k as f64;
                let lhs = ((s - 1.0) * zeta(s)? - 1.0).abs();
                pole_worst = pole_worst.max(lhs / (2.0 * (s - 1.0)));
            }
            Ok((scaled, ratios, final_gap, zeta2_err, pole_worst))
        };
        match run() {
            Ok((scaled, ratios, final_gap, zeta2_err, pole_worst)) => {
                let ratios_ok = ratios.iter().all(|r| (r - 0.5).abs() <= 0.15);
                let ok = ratios_ok && final_gap <= 0.05 && zeta2_err <= 1e-12 && pole_worst <= 1.0;
                outcome(
                    4,
                    "Kac sums against the zeta pole",
                    ok,
                    format!(
                        "scaled kac = {:?}, diff ratios = {:?}, final gap = {:.2}%, \
                         |zeta(2)-pi^2/6| = {zeta2_err:.1e}, pole bound ratio = {pole_worst:.2}",
                        scaled.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>(),
                        ratios.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>(),
                        100.0 * final_gap
                    ),
                )
            }
            Err(e) => outcome(
                4,
                "Kac sums against the zeta pole",
                false,
                format!("error: {e}"),
            ),
        }
    }

    /// Oracle equivalence of the two SRB-integral routes for
    /// phi in {x, x^2, sqrt(x)} at alpha in {0.8, 0.9, 1.0}: agreement within
    /// the summed declared bounds, themselves <= 1e-3 of the value.
    pub fn c05_srb_oracle_equivalence(&self) -> CriterionResult {
        let mut passed = true;
        let mut parts = Vec::new();
        for alpha in [0.8, 0.9, 1.0] {
            match self.artifacts(alpha, true) {
                Ok(art) => {
                    let oracle = art.oracle_srb.as_ref().expect("oracle requested");
                    for p in [Self::P_X, Self::P_X2, Self::P_SQRT] {
                        let r1 = &art.record.srb[p];
                        let r2 = &oracle[p];
                        let budget = r1.declared_tail_bound + r2.declared_tail_bound;
                        let diff = (r1.value - r2.value).abs();
                        let ok = diff <= budget && budget <= 1e-3 * r1.value.abs();
                        passed &= ok;
                        parts.push(format!(
                            "a={alpha} {}: diff={diff:.1e} budget={budget:.1e} ({:.1e} of value)",
                            r1.potential,
                            budget / r1.value.abs()
                        ));
                    }
                }
                Err(e) => {
                    passed = false;
                    parts.push(format!("a={alpha}: error {e}"));
                }
            }
        }
        outcome(
            5,
            "SRB-integral oracle equivalence",
            passed,
            parts.join("; "),
        )
    }

    /// Continuity at the transition: srb(alpha_j) increments shrink
    /// monotonically toward srb(1), and R_Phy -> phi(0), for every built-in
    /// potential.
    pub fn c06_continuity(&self) -> CriterionResult {
        let run = || -> Result<(bool, Vec<String>)> {
            let curve = self.geometric_records(4, 10)?;
            let rec1 = self.artifacts(1.0, false)?;
            let mut ok = true;
            let mut parts = Vec::new();
            for (p, name) in curve.potentials.iter().enumerate() {
                let s1 = rec1.record.srb[p].value;
                let vals: Vec<f64> = curve.records.iter().map(|r| r.srb[p].value).collect();
                let incs: Vec<f64> = vals.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
                let incs_shrink = incs.windows(2).all(|w| w[1] < w[0]);
                let gaps: Vec<f64> = vals.iter().map(|v| (v - s1).abs()).collect();
                let gaps_shrink = gaps.windows(2).all(|w| w[1] < w[0]);
                let phi0_gap: Vec<f64> = curve
                    .records
                    .iter()
                    .map(|r| (r.r_phy[p] - self.potentials[p].value_at_zero).abs())
                    .collect();
                let phy_converges = phi0_gap.windows(2).all(|w| w[1] < w[0]);
                ok &= incs_shrink && gaps_shrink && phy_converges;
                parts.push(format!(
                    "{name}: srb gap {:.1e} -> {:.1e}, |r_phy - phi(0)| {:.1e} -> {:.1e}",
                    gaps.first().unwrap(),
                    gaps.last().unwrap(),
                    phi0_gap.first().unwrap(),
                    phi0_gap.last().unwrap()
                ));
            }
            Ok((ok, parts))
        };
        match run() {
            Ok((ok, parts)) => outcome(6, "continuity at the transition", ok, parts.join("; ")),
            Err(e) => outcome(
                6,
                "continuity at the transition",
                false,
                format!("error: {e}"),
            ),
        }
    }

    /// One-sided derivative at the transition: the Richardson-extrapolated
    /// quotient over j = 4..10 matches `-8/rho1(1/2) * int(phi - phi(0)) dnu1`
    /// (both factors computed in-artifact) within 5%, for phi in
    /// {x, x^2, cos(2 pi x) - 1}.
    pub fn c07_one_sided_derivative(&self) -> CriterionResult {
        let run = || -> Result<(bool, Vec<String>)> {
            let curve = self.geometric_records(4, 10)?;
            let rec1 = self.artifacts(1.0, false)?;
            let rho1_half = 2.0 * rec1.record.h_half;
            let mut ok = true;
            let mut parts = Vec::new();
            for p in [Self::P_X, Self::P_X2, Self::P_COS] {
                let rep = one_sided_derivative(&curve, &rec1.record, p)?;
                let target = -8.0 / rho1_half * rec1.record.srb[p].value;
                let gap = (rep.richardson - target).abs() / target.abs();
                ok &= gap <= 0.05 && rep.converged;
                parts.push(format!(
                    "{}: richardson={:.5}, -8/rho1(1/2)*S1={:.5}, gap={:.1}% (fitted-c1 target {:.5}, gap {:.1e})",
                    rep.potential,
                    rep.richardson,
                    target,
                    100.0 * gap,
                    rep.analytic_target,
                    rep.relative_gap
                ));
            }
            Ok((ok, parts))
        };
        match run() {
            Ok((ok, parts)) => outcome(
                7,
                "one-sided derivative at the transition",
                ok,
                parts.join("; "),
            ),
            Err(e) => outcome(
                7,
                "one-sided derivative at the transition",
                false,
                format!("error: {e}"),
            ),
        }
    }

    /// Differentiability criterion: a potential calibrated so its nu_1
    /// integral vanishes has an extrapolated quotient at most 1% of the
    /// phi = x quotient magnitude.
    pub fn c08_differentiability_criterion(&self) -> CriterionResult {
        let run = || -> Result<(f64, f64, f64)> {
            let curve = self.geometric_records(4, 10)?;
            let rec1 = self.artifacts(1.0, false)?;
            let s1x = rec1.record.srb[Self::P_X].value;
            let s1x2 = rec1.record.srb[Self::P_X2].value;
            // phi = x - a x^2 with a = S1(x)/S1(x^2); by linearity of the
            // branch sums the calibrated integral vanishes identically.
            let a = s1x / s1x2;
            let residual = s1x - a * s1x2;
            let quotients: Vec<f64> = curve
                .records
                .iter()
                .map(|r| {
                    let kac = r.kac.total().expect("finite below transition");
                    (r.srb[Self::P_X].value - a * r.srb[Self::P_X2].value) / (kac * (r.alpha - 1.0))
                })
                .collect();
            let cal = richardson_extrapolate(&quotients);
            let x_rep = one_sided_derivative(&curve, &rec1.record, Self::P_X)?;
            Ok((residual, cal, cal.abs() / x_rep.richardson.abs()))
        };
        match run() {
            Ok((residual, cal, ratio)) => outcome(
                8,
                "differentiability criterion for a calibrated potential",
                residual.abs() <= 1e-6 && ratio <= 1e-2,
                format!(
                    "calibration residual = {residual:.1e}, extrapolated quotient = {cal:.2e}, \
                     ratio to |x quotient| = {ratio:.2e}"
                ),
            ),
            Err(e) => outcome(
                8,
                "differentiability criterion for a calibrated potential",
                false,
                format!("error: {e}"),
            ),
        }
    }

    /// Physical-measure simulation: the alpha = 0.8 ensemble mean matches the
    /// computed physical integral within 3 SE; at alpha = 1.25 the orbit
    /// concentrates at the neutral fixed point (occupation of [0, 0.05)
    /// >= 0.99 and time average of x within 3 SE of 0 at n = 1e7).
    pub fn c09_simulation(&self) -> CriterionResult {
        let run = || -> Result<(f64, f64, f64, f64, f64, f64, f64)> {
            let phi = Potential::x();
            let cfg8 = OrbitEnsembleConfig {
                alpha: 0.8,
                n_steps: 10_000_000,
                n_orbits: 64,
                seed: ENSEMBLE_SEED,
                burn_in: 1000,
                initial_law: InitialLaw::UnitInterval,
            };
            let stats8 = birkhoff_average(&cfg8, &phi)?;
            let phy = self.artifacts(0.8, false)?.record.r_phy[Self::P_X];
            let cfg125 = OrbitEnsembleConfig {
                alpha: 1.25,
                ..cfg8
            };
            let occ = occupation_near_zero(&cfg125, 0.05)?;
            let avg125 = birkhoff_average(&cfg125, &phi)?;
            Ok((
                stats8.mean,
                stats8.std_error,
                phy,
                occ.mean,
                occ.std_error,
                avg125.mean,
                avg125.std_error,
            ))
        };
        match run() {
            Ok((mean8, se8, phy, occ, occ_se, mean125, se125)) => {
                let gap_se = (mean8 - phy).abs() / se8;
                let ok = gap_se <= 3.0 && occ >= 0.99 && mean125.abs() <= 3.0 * se125;
                outcome(
                    9,
                    "physical-measure simulation",
                    ok,
                    format!(
                        "a=0.8: ensemble {mean8:.5} vs integral {phy:.5} ({gap_se:.2} SE); \
                         a=1.25: occupation(0.05) = {occ:.4} (SE {occ_se:.1e}), \
                         time-avg x = {mean125:.4} ({:.1} SE from 0)",
                        mean125.abs() / se125
                    ),
                )
            }
            Err(e) => outcome(
                9,
                "physical-measure simulation",
                false,
                format!("error: {e}"),
            ),
        }
    }

    /// Algebraic identities to a few ulp: summation by parts of the Kac sum,
    /// the Kac rearrangement of the physical integral, and shift invariance
    /// of the centered integral at the transition.
    pub fn c10_algebraic_identities(&self) -> CriterionResult {
        let run = || -> Result<(f64, f64, f64)> {
            let art = self.artifacts(0.8, false)?;
            let map = LsvMap::lsv(0.8)?;
            let yseq = y_sequence(&map, 10_000)?;
            let tails: Vec<f64> = (0..=10_000)
                .map(|n| tail_mass(&art.density, &yseq, n))
                .collect();
            let (lhs, rhs) = abel_summation_sides(&tails);
            let abel_ulp = (lhs - rhs).abs() / (f64::EPSILON * lhs.abs().max(1.0));

            let rec = &art.record;
            let kac = rec.kac.total().expect("finite");
            let lhs2 = rec.r_phy[Self::P_X] - 0.0;
            let rhs2 = rec.srb[Self::P_X].value / kac;
            let kac_ulp = (lhs2 - rhs2).abs() / (f64::EPSILON * lhs2.abs().max(1.0));

            // Shift invariance at the transition on a light grid.
            let map1 = LsvMap::lsv(1.0)?;
            let sys1 = InducedSystem::build(map1, 2000, 2000)?;
            let solver = DensitySolver::new(&sys1, 257)?;
            let d1 = solver.solve(1e-10, 2000, Start::Flat)?;
            let shifted = Potential::custom("x-c", |x| x - 0.6180339887498949, 1.0, 1.0 + 1e-9)?;
            let a = srb_integral(&solver, &d1, &[Potential::x()])?;
            let b = srb_integral(&solver, &d1, &[shifted])?;
            let shift_ulp =
                (a[0].value - b[0].value).abs() / (f64::EPSILON * a[0].value.abs().max(1.0));
            Ok((abel_ulp, kac_ulp, shift_ulp))
        };
        match run() {
            Ok((abel_ulp, kac_ulp, shift_ulp)) => outcome(
                10,
                "algebraic identities",
                abel_ulp <= 4.0 && kac_ulp <= 4.0 && shift_ulp <= 4.0,
                format!(
                    "abel = {abel_ulp:.2} ulp, kac rearrangement = {kac_ulp:.2} ulp, \
                     shift invariance = {shift_ulp:.2} ulp"
                ),
            ),
            Err(e) => outcome(10, "algebraic identities", false, format!("error: {e}")),
        }
    }

    /// Runs every criterion in order.
    pub fn run_all(&self) -> Vec<CriterionResult> {
        vec![
            self.c01_y_asymptotics(),
            self.c02_fixed_point(),
            self.c03_tail_expansion(),
            self.c04_kac_zeta_pole(),
            self.c05_srb_oracle_equivalence(),
            self.c06_continuity(),
            self.c07_one_sided_derivative(),
            self.c08_differentiability_criterion(),
            self.c09_simulation(),
            self.c10_algebraic_identities(),
        ]
    }
}

/// Convenience for the CLI: run all criteria with default settings.
pub fn run_acceptance() -> Vec<CriterionResult> {
    Acceptance::new().run_all()
}
