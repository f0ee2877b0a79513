//! Return-time tail masses, power-law fits, and Kac sums.
//!
//! The closure of `{tau > n}` in Y is `[1/2, (1+y_n)/2]`, so tail masses are
//! cumulative integrals of the induced density. Fitted `(c, v)` feed the
//! zeta-tail correction of truncated Kac sums; near the transition the
//! corrected sum diverges exactly like the zeta pole.

use crate::density::DensityApprox;
use crate::error::{Error, Result};
use crate::induced::log_spaced;
use crate::interp::compensated_sum;
use crate::maps::YSequence;
use crate::zeta::zeta_tail;

/// Tail profile `n -> nu~(tau > n)` with its fitted power law.
#[derive(Debug, Clone, serde::Serialize)]
pub struct TailProfile {
    pub alpha: f64,
    pub n_values: Vec<usize>,
    pub tail_masses: Vec<f64>,
    /// Leading coefficient of the fitted `c n^{-v}`.
    pub fitted_c: f64,
    /// Fitted decay exponent `v` (the family has `v = 1/alpha`).
    pub fitted_exponent: f64,
    pub fit_window: (usize, usize),
    /// Max absolute log-space residual of the fit.
    pub fit_residual: f64,
    /// Log-log slope of `|tail - c n^{-v}|`, when resolvable.
    pub second_order_slope: Option<f64>,
    /// Boundary-value prediction for the same constant:
    /// `h(1/2) |(f_right^{-1})'(0)| / (alpha b)^{1/alpha}`.
    pub predicted_c: f64,
}

/// `nu~(tau > n)`, the induced-measure mass of `[1/2, (1+y_n)/2]`.
pub fn tail_mass(density: &DensityApprox, yseq: &YSequence, n: usize) -> f64 {
    let y = yseq.y(n);
    density.mass_to(0.5 * (1.0 + y))
}

/// Ordinary log-log least squares of `values ~ c n^{-v}`.
/// Returns `(c, v, max_log_residual)`.
pub fn fit_power_law(ns: &[usize], values: &[f64]) -> Result<(f64, f64, f64)> {
    if ns.len() != values.len() || ns.len() < 20 {
        return Err(Error::IllConditionedFit(format!(
            "need >= 20 fit points, got {}",
            ns.len()
        )));
    }
    if values.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::IllConditionedFit("non-positive tail values".into()));
    }
    let pts: Vec<(f64, f64)> = ns
        .iter()
        .zip(values)
        .map(|(&n, &t)| ((n as f64).ln(), t.ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for &(x, y) in &pts {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx <= 0.0 {
        return Err(Error::IllConditionedFit(
            "degenerate abscissa spread".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let resid = pts
        .iter()
        .map(|&(x, y)| (y - (intercept + slope * x)).abs())
        .fold(0.0f64, f64::max);
    Ok((intercept.exp(), -slope, resid))
}

/// Tail masses over a log-spaced window plus the fitted `(c, v)`.
pub fn fit_tail(
    density: &DensityApprox,
    yseq: &YSequence,
    window: (usize, usize),
    points: usize,
) -> Result<TailProfile> {
    let (lo, hi) = window;
    if lo < 1 || hi <= lo || hi > yseq.max_index() {
        return Err(Error::Domain(format!(
            "fit window ({lo}, {hi}) outside available range 1..={}",
            yseq.max_index()
        )));
    }
    let ns = log_spaced(lo, hi, points.max(2) - 1);
    if ns.len() < 20 {
        return Err(Error::IllConditionedFit(format!(
            "window ({lo}, {hi}) yields only {} distinct points",
            ns.len()
        )));
    }
    let masses: Vec<f64> = ns.iter().map(|&n| tail_mass(density, yseq, n)).collect();
    let (c, v, resid) = fit_power_law(&ns, &masses)?;

    // Decay of the residual against the fitted leading term.
    let mut rpts: Vec<(f64, f64)> = Vec::new();
    for (&n, &t) in ns.iter().zip(&masses) {
        let model = c * (n as f64).powf(-v);
        let r = (t - model).abs();
        if r > 1e-13 * t {
            rpts.push(((n as f64).ln(), r.ln()));
        }
    }
    let second_order_slope = if rpts.len() >= 8 {
        Some(crate::maps::least_squares_slope(&rpts))
    } else {
        None
    };

    let params = map_params_of(density);
    let predicted_c = density.h_half() * 0.5 / (params.0 * params.1).powf(1.0 / params.0);

    Ok(TailProfile {
        alpha: density.alpha,
        n_values: ns,
        tail_masses: masses,
        fitted_c: c,
        fitted_exponent: v,
        fit_window: window,
        fit_residual: resid,
        second_order_slope,
        predicted_c,
    })
}

/// (alpha, b_alpha) recovered from the density tag (`b = 2^alpha` family).
fn map_params_of(density: &DensityApprox) -> (f64, f64) {
    (density.alpha, 2f64.powf(density.alpha))
}

/// Truncated Kac sum `sum_{k=0..n_max} nu~(tau > k)` with its analytic
/// continuation. Finite below the transition; reported as partial sums with
/// a fitted growth law at and above it.
#[derive(Debug, Clone, serde::Serialize)]
pub enum KacSum {
    Finite {
        partial: f64,
        /// `c_fit * sum_{k > n_max} k^{-1/alpha}` via the zeta tail.
        tail_correction: f64,
        total: f64,
        n_max: usize,
    },
    Divergent {
        partial: f64,
        n_max: usize,
        growth: GrowthLaw,
    },
}

#[derive(Debug, Clone, serde::Serialize)]
pub enum GrowthLaw {
    /// Partial sums grow like `coefficient * ln n` (the transition point).
    Log { coefficient: f64 },
    /// Partial sums grow like `coefficient * n^exponent`.
    Power { exponent: f64, coefficient: f64 },
}

impl KacSum {
    /// The tail-corrected total; `None` above the transition.
    pub fn total(&self) -> Option<f64> {
        match self {
            KacSum::Finite { total, .. } => Some(*total),
            KacSum::Divergent { .. } => None,
        }
    }

    pub fn partial(&self) -> f64 {
        match self {
            KacSum::Finite { partial, .. } | KacSum::Divergent { partial, .. } => *partial,
        }
    }
}

pub fn kac_sum(
    density: &DensityApprox,
    yseq: &YSequence,
    n_max: usize,
    profile: &TailProfile,
) -> Result<KacSum> {
    if n_max > yseq.max_index() {
        return Err(Error::Domain(format!(
            "n_max = {n_max} exceeds y-sequence range {}",
            yseq.max_index()
        )));
    }
    let alpha = density.alpha;
    let v = 1.0 / alpha;
    let tails: Vec<f64> = (0..=n_max).map(|n| tail_mass(density, yseq, n)).collect();
    let partial = compensated_sum(tails.iter().copied());

    if alpha < 1.0 {
        let correction = profile.fitted_c * zeta_tail(v, n_max)?;
        Ok(KacSum::Finite {
            partial,
            tail_correction: correction,
            total: partial + correction,
            n_max,
        })
    } else {
        // Fit the divergence rate of the partial sums over the last decade.
        let lo = (n_max / 10).max(10);
        let ns = log_spaced(lo, n_max, 24);
        let mut running = compensated_sum(tails[..=lo].iter().copied());
        let mut fitted: Vec<(f64, f64)> = vec![((lo as f64).ln(), running)];
        let mut prev = lo;
        for &n in ns.iter().skip(1) {
            running += compensated_sum(tails[prev + 1..=n].iter().copied());
            fitted.push(((n as f64).ln(), running));
            prev = n;
        }
        let growth = if (alpha - 1.0).abs() < 1e-9 {
            // S_n ~ c ln n: slope in ln n.
            let slope = crate::maps::least_squares_slope(&fitted);
            GrowthLaw::Log { coefficient: slope }
        } else {
            let pts: Vec<(f64, f64)> = fitted.iter().map(|&(ln_n, s)| (ln_n, s.ln())).collect();
            let expo = crate::maps::least_squares_slope(&pts);
            let level = pts.iter().map(|&(x, y)| y - expo * x).sum::<f64>() / pts.len() as f64;
            GrowthLaw::Power {
                exponent: expo,
                coefficient: level.exp(),
            }
        };
        Ok(KacSum::Divergent {
            partial,
            n_max,
            growth,
        })
    }
}

/// Both sides of the summation-by-parts identity
/// `sum_{n=0}^{K-1} T_n = sum_{k=1}^{K} k (T_{k-1} - T_k) + K T_K`,
/// computed with compensated sums. Equality to a few ulp is pure algebra.
pub fn abel_summation_sides(tails: &[f64]) -> (f64, f64) {
    let k_cap = tails.len() - 1;
    let lhs = compensated_sum(tails[..k_cap].iter().copied());
    let rhs = compensated_sum((1..=k_cap).map(|k| k as f64 * (tails[k - 1] - tails[k])))
        + k_cap as f64 * tails[k_cap];
    (lhs, rhs)
}

/// Two-sided comparability report: the smallest `D >= 1` with
/// `D^{-1} c n^{-v} <= tail(n) <= D c n^{-v}` over the profile points.
#[derive(Debug, Clone, serde::Serialize)]
pub struct X3Report {
    pub minimal_d: f64,
    pub c: f64,
    pub v: f64,
}

pub fn check_x3_bounds(profile: &TailProfile, c: f64, v: f64) -> X3Report {
    let mut d = 1.0f64;
    for (&n, &t) in profile.n_values.iter().zip(&profile.tail_masses) {
        let model = c * (n as f64).powf(-v);
        let r = t / model;
        d = d.max(r).max(1.0 / r);
    }
    X3Report { minimal_d: d, c, v }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{solve_density, DensityApprox};
    use crate::induced::InducedSystem;
    use crate::maps::LsvMap;

    fn pipeline(alpha: f64, k_max: usize, yseq_len: usize) -> (InducedSystem, DensityApprox) {
        let sys = InducedSystem::build(LsvMap::lsv(alpha).unwrap(), k_max, yseq_len).unwrap();
        let d = solve_density(&sys, 257, 1e-10, 2000).unwrap();
        (sys, d)
    }

    #[test]
    fn tail_mass_at_zero_is_one() {
        let (sys, d) = pipeline(0.8, 1000, 1000);
        let t0 = tail_mass(&d, &sys.yseq, 0);
        assert!((t0 - 1.0).abs() < 1e-12, "{t0}");
    }

    #[test]
    fn tail_masses_strictly_decreasing() {
        let (sys, d) = pipeline(1.0, 2000, 2000);
        let mut prev = tail_mass(&d, &sys.yseq, 0);
        for n in 1..50 {
            let t = tail_mass(&d, &sys.yseq, n);
            assert!(t < prev && t > 0.0);
            prev = t;
        }
    }

    #[test]
    fn synthetic_power_law_recovered_exactly() {
        let ns: Vec<usize> = log_spaced(100, 10_000, 40);
        let c = 0.731;
        let v = 1.19;
        let vals: Vec<f64> = ns.iter().map(|&n| c * (n as f64).powf(-v)).collect();
        let (ch, vh, resid) = fit_power_law(&ns, &vals).unwrap();
        assert!((ch - c).abs() < 1e-6 * c, "{ch}");
        assert!((vh - v).abs() < 1e-6, "{vh}");
        assert!(resid < 1e-10);
    }

    #[test]
    fn fit_rejects_narrow_windows() {
        let ns: Vec<usize> = (1..=10).collect();
        let vals: Vec<f64> = ns.iter().map(|&n| (n as f64).powf(-1.2)).collect();
        assert!(matches!(
            fit_power_law(&ns, &vals),
            Err(Error::IllConditionedFit(_))
        ));
    }

    #[test]
    fn fitted_exponent_tracks_reciprocal_alpha() {
        let (sys, d) = pipeline(0.8, 2000, 20_000);
        let profile = fit_tail(&d, &sys.yseq, (1000, 20_000), 40).unwrap();
        let expect = 1.0 / 0.8;
        assert!(
            (profile.fitted_exponent - expect).abs() < 0.02 * expect,
            "fitted v = {}",
            profile.fitted_exponent
        );
        // Plugging the fit back reproduces the data within its residual.
        for (&n, &t) in profile.n_values.iter().zip(&profile.tail_masses) {
            let model = profile.fitted_c * (n as f64).powf(-profile.fitted_exponent);
            assert!((t.ln() - model.ln()).abs() <= profile.fit_residual + 1e-12);
        }
    }

    #[test]
    fn x3_comparability_near_one() {
        let (sys, d) = pipeline(0.8, 2000, 20_000);
        let profile = fit_tail(&d, &sys.yseq, (1000, 20_000), 40).unwrap();
        let report = check_x3_bounds(&profile, profile.fitted_c, profile.fitted_exponent);
        assert!(report.minimal_d < 1.05, "D = {}", report.minimal_d);
        // An exact power law gives D = 1.
        let ns = profile.n_values.clone();
        let exact: Vec<f64> = ns.iter().map(|&n| 0.5 * (n as f64).powf(-1.25)).collect();
        let synthetic = TailProfile {
            n_values: ns,
            tail_masses: exact,
            ..profile
        };
        let r = check_x3_bounds(&synthetic, 0.5, 1.25);
        assert!((r.minimal_d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn abel_identity_holds_to_ulp() {
        let (sys, d) = pipeline(0.8, 2000, 2000);
        let tails: Vec<f64> = (0..=1500).map(|n| tail_mass(&d, &sys.yseq, n)).collect();
        let (lhs, rhs) = abel_summation_sides(&tails);
        assert!(
            (lhs - rhs).abs() <= 4.0 * f64::EPSILON * lhs.abs().max(1.0),
            "{lhs} vs {rhs}"
        );
    }

    #[test]
    fn kac_sum_finite_below_transition() {
        let (sys, d) = pipeline(0.8, 2000, 20_000);
        let profile = fit_tail(&d, &sys.yseq, (1000, 20_000), 40).unwrap();
        let kac = kac_sum(&d, &sys.yseq, 20_000, &profile).unwrap();
        match kac {
            KacSum::Finite {
                partial,
                tail_correction,
                total,
                ..
            } => {
                assert!(partial > 1.0 && tail_correction > 0.0);
                assert!(total > partial);
                // Compare against a longer partial sum: the correction should
                // account for most of what is missing.
                let (sys2, d2) = pipeline(0.8, 2000, 100_000);
                let profile2 = fit_tail(&d2, &sys2.yseq, (1000, 20_000), 40).unwrap();
                let kac2 = kac_sum(&d2, &sys2.yseq, 100_000, &profile2).unwrap();
                let total2 = kac2.total().unwrap();
                assert!((total - total2).abs() < 5e-3 * total, "{total} vs {total2}");
            }
            _ => panic!("expected finite Kac sum at alpha = 0.8"),
        }
    }

    #[test]
    fn kac_sum_diverges_logarithmically_at_transition() {
        let (sys, d) = pipeline(1.0, 2000, 50_000);
        let profile = fit_tail(&d, &sys.yseq, (1000, 20_000), 40).unwrap();
        let kac = kac_sum(&d, &sys.yseq, 50_000, &profile).unwrap();
        match kac {
            KacSum::Divergent {
                growth: GrowthLaw::Log { coefficient },
                ..
            } => {
                // The log-growth slope of the Kac partial sums is the tail
                // constant itself.
                assert!(
                    (coefficient - profile.fitted_c).abs() < 0.05 * profile.fitted_c,
                    "slope {coefficient} vs c {}",
                    profile.fitted_c
                );
            }
            other => panic!("expected log growth at alpha = 1, got {other:?}"),
        }
    }
}
