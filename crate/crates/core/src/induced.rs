//! First-return structure over the inducing domain Y = [1/2, 1].
//!
//! The return time is k exactly on the cylinder
//! `C_k = [(1+y_k)/2, (1+y_{k-1})/2]`, where `y_n` is the backward orbit of 1
//! under the left branch. The induced-map inverse branches are
//! `F_k^{-1}(x) = f_right^{-1}(f_left^{-(k-1)}(x))` with weights
//! `G_k(x) = |dF_k^{-1}/dx|`, computed by the exact chain rule along the
//! backward orbit (never by numerical differencing).

use crate::error::{Error, Result};
use crate::maps::{least_squares_slope, y_sequence, IntervalFamily, LsvMap, YSequence};
use crate::parallel;
use crate::zeta::zeta_tail;

/// The induced first-return system with its truncation metadata.
#[derive(Debug, Clone)]
pub struct InducedSystem {
    pub map: LsvMap,
    pub k_max: usize,
    pub yseq: YSequence,
    /// Empirical constant `D1` with `sup_x G_k(x) <= D1 k^{-1-1/alpha}` over
    /// the checked range.
    pub tail_bound_constant: f64,
    /// Fitted log-log decay exponent of `sup_x G_k(x)` (close to -(1+1/alpha)).
    pub sup_decay_exponent: f64,
    /// Integral-test bound on the discarded weight mass:
    /// `sum_{k > k_max} sup_x G_k(x) <= D1 alpha k_max^{-1/alpha}`.
    pub tail_sup_bound: f64,
    /// `sup_x G_k(x)` for k = 1..=k_max (attained at x = 1/2 for this family).
    sup_weights: Vec<f64>,
}

impl InducedSystem {
    /// Builds the system: y-sequence, sup-weight profile, and tail-bound fit.
    ///
    /// `yseq_len` controls how far the y-sequence extends (tail profiles may
    /// need more entries than `k_max`); it is raised to at least `k_max`.
    pub fn build(map: LsvMap, k_max: usize, yseq_len: usize) -> Result<Self> {
        if k_max < 16 {
            return Err(Error::Domain(format!("k_max must be >= 16, got {k_max}")));
        }
        let yseq = y_sequence(&map, yseq_len.max(k_max))?;

        // Weight profile at x = 1/2. G_k is decreasing in x (the left-branch
        // derivative grows along the backward orbit), so this is the sup.
        let mut sup_weights = Vec::with_capacity(k_max);
        let mut z = 0.5_f64;
        let mut deriv_prod = 1.0_f64;
        for _ in 1..=k_max {
            sup_weights.push(0.5 * deriv_prod);
            z = map.left_inverse_unchecked(z);
            deriv_prod /= map.left_derivative(z);
        }

        let s = 1.0 + 1.0 / map.params.alpha;
        // Slope from the last decade only: small-k transients bias the
        // asymptotic exponent and with it the weight-tail extrapolation.
        let slope_samples = log_spaced((k_max / 10).max(16), k_max, 48);
        let pts: Vec<(f64, f64)> = slope_samples
            .iter()
            .map(|&k| ((k as f64).ln(), sup_weights[k - 1].ln()))
            .collect();
        let sup_decay_exponent = least_squares_slope(&pts);
        let tail_bound_constant = log_spaced(16.min(k_max), k_max, 64)
            .iter()
            .map(|&k| sup_weights[k - 1] * (k as f64).powf(s))
            .fold(0.0_f64, f64::max);
        let tail_sup_bound =
            tail_bound_constant * map.params.alpha * (k_max as f64).powf(-1.0 / map.params.alpha);

        Ok(Self {
            map,
            k_max,
            yseq,
            tail_bound_constant,
            sup_decay_exponent,
            tail_sup_bound,
            sup_weights,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.map.params.alpha
    }

    /// `sup_x G_k(x)` for `k` in `1..=k_max`.
    pub fn sup_weight(&self, k: usize) -> f64 {
        self.sup_weights[k - 1]
    }

    /// Decay exponent used for weight-tail extrapolation: the measured
    /// log-log slope when healthy, otherwise the asymptotic value.
    pub fn tail_exponent(&self) -> f64 {
        let theory = 1.0 + 1.0 / self.map.params.alpha;
        let fitted = -self.sup_decay_exponent;
        if fitted > 1.01 && (fitted - theory).abs() < 0.5 * theory {
            fitted
        } else {
            theory
        }
    }

    /// The k-th return-time cylinder `[(1+y_k)/2, (1+y_{k-1})/2]`
    /// (closed on the left, half-open on the right by convention).
    pub fn cylinder(&self, k: usize) -> (f64, f64) {
        assert!(k >= 1 && k <= self.yseq.max_index(), "cylinder index {k}");
        (
            self.map.right_inverse(self.yseq.y(k)),
            self.map.right_inverse(self.yseq.y(k - 1)),
        )
    }

    /// Composed inverse branch `F_k^{-1}(x)` into the k-th cylinder.
    pub fn inverse_branch_composed(&self, k: usize, x: f64) -> Result<f64> {
        if !(0.5..=1.0).contains(&x) {
            return Err(Error::Domain(format!("x = {x} outside [1/2, 1]")));
        }
        if k == 0 {
            return Err(Error::Domain("return-time index k must be >= 1".into()));
        }
        let mut z = x;
        for _ in 1..k {
            z = self.map.left_inverse_unchecked(z);
        }
        Ok(self.map.right_inverse(z))
    }

    /// Weight `G_k(x) = |d/dx F_k^{-1}(x)|` by the exact chain rule.
    pub fn weight(&self, k: usize, x: f64) -> Result<f64> {
        if !(0.5..=1.0).contains(&x) {
            return Err(Error::Domain(format!("x = {x} outside [1/2, 1]")));
        }
        if k == 0 {
            return Err(Error::Domain("return-time index k must be >= 1".into()));
        }
        let mut z = x;
        let mut deriv_prod = 1.0_f64;
        for _ in 1..k {
            z = self.map.left_inverse_unchecked(z);
            deriv_prod /= self.map.left_derivative(z);
        }
        Ok(0.5 * deriv_prod)
    }

    /// Per-node branch cache for operator application and branch sums.
    pub fn cache_for_nodes(&self, nodes: &[f64]) -> NodeCache {
        NodeCache::build(self, nodes)
    }
}

/// Cached inverse-branch data on a fixed set of evaluation nodes.
///
/// For node `x` and k = 1..=k_max this stores `F_k^{-1}(x)` and `G_k(x)`,
/// plus the estimated residual weight `sum_{k > k_max} G_k(x)` used as the
/// truncation correction of the transfer operator. Construction is
/// parallelized per node; afterwards the cache is immutable.
pub struct NodeCache {
    pub nodes: Vec<f64>,
    pub k_max: usize,
    /// `pos[node * k_max + (k-1)] = F_k^{-1}(x_node)`.
    pub pos: Vec<f64>,
    /// `wgt[node * k_max + (k-1)] = G_k(x_node)`.
    pub wgt: Vec<f64>,
    /// Estimated `sum_{k > k_max} G_k(x_node)` per node.
    pub tail_weight: Vec<f64>,
}

impl NodeCache {
    fn build(sys: &InducedSystem, nodes: &[f64]) -> Self {
        let k_max = sys.k_max;
        let map = sys.map;
        // Tail model: G_k(x) ~ D(x) k^{-s}, anchored per node at k = k_max
        // with the node's own two-point decay slope over the last octave
        // (falls back to the system-wide fit when degenerate).
        let s_global = sys.tail_exponent();
        let half = k_max / 2;

        let rows = parallel::map_indexed(nodes.len(), |i| {
            let x = nodes[i];
            let mut pos = Vec::with_capacity(k_max);
            let mut wgt = Vec::with_capacity(k_max);
            let mut z = x;
            let mut deriv_prod = 1.0_f64;
            for _ in 1..=k_max {
                pos.push(map.right_inverse(z));
                wgt.push(0.5 * deriv_prod);
                z = map.left_inverse_unchecked(z);
                deriv_prod /= map.left_derivative(z);
            }
            let s_local = (wgt[half - 1] / wgt[k_max - 1]).ln() / (k_max as f64 / half as f64).ln();
            let s = if s_local.is_finite() && s_local > 1.01 {
                s_local
            } else {
                s_global
            };
            let tail =
                wgt[k_max - 1] * (k_max as f64).powf(s) * zeta_tail(s, k_max).expect("s > 1");
            (pos, wgt, tail)
        });

        let mut pos = Vec::with_capacity(nodes.len() * k_max);
        let mut wgt = Vec::with_capacity(nodes.len() * k_max);
        let mut tail_weight = Vec::with_capacity(nodes.len());
        for (p_row, w_row, t) in rows {
            pos.extend_from_slice(&p_row);
            wgt.extend_from_slice(&w_row);
            tail_weight.push(t);
        }
        Self {
            nodes: nodes.to_vec(),
            k_max,
            pos,
            wgt,
            tail_weight,
        }
    }

    #[inline]
    pub fn row(&self, node: usize) -> (&[f64], &[f64]) {
        let lo = node * self.k_max;
        let hi = lo + self.k_max;
        (&self.pos[lo..hi], &self.wgt[lo..hi])
    }
}

/// Value and first three x-derivatives of the running left-inverse
/// composition `f_left^{-j}` at a point, advanced one inversion at a time.
#[derive(Clone, Copy)]
struct DerivState {
    v: f64,
    d1: f64,
    d2: f64,
    d3: f64,
}

impl DerivState {
    fn start(x: f64) -> Self {
        Self {
            v: x,
            d1: 1.0,
            d2: 0.0,
            d3: 0.0,
        }
    }

    /// Composes one more left-branch inverse in front.
    fn step(&mut self, map: &LsvMap) {
        let g = map.left_inverse_unchecked(self.v);
        let fp = map.derivative(0, g);
        let fpp = map.second_derivative(0, g);
        let fppp = map.third_derivative(0, g);
        let gp = 1.0 / fp;
        let gpp = -fpp * gp * gp * gp;
        let gppp = (3.0 * fpp * fpp - fp * fppp) * gp.powi(5);
        let c1 = gp * self.d1;
        let c2 = gpp * self.d1 * self.d1 + gp * self.d2;
        let c3 = gppp * self.d1 * self.d1 * self.d1 + 3.0 * gpp * self.d1 * self.d2 + gp * self.d3;
        self.v = g;
        self.d1 = c1;
        self.d2 = c2;
        self.d3 = c3;
    }

    /// Applies the right-branch inverse (1+u)/2 in front: every derivative
    /// order halves.
    fn into_branch(self) -> (f64, f64, f64, f64) {
        (
            0.5 * (1.0 + self.v),
            0.5 * self.d1,
            0.5 * self.d2,
            0.5 * self.d3,
        )
    }
}

/// Numeric spot checks of the distortion and parameter-regularity conditions
/// on the induced branches: weight bound (A1), distortion ratios G'/G and
/// G''/G (A2, A3), alpha-derivatives of the branch data (A4-A6, central
/// differences in alpha), and the weighted summability (A7). Report-only.
#[derive(Debug, Clone, serde::Serialize)]
pub struct AConditionsReport {
    pub alphas: Vec<f64>,
    pub k_checked: usize,
    pub grid_points: usize,
    pub alpha_step: f64,
    /// max over alpha, k, x of G_k(x); (A1) demands <= 1/2.
    pub a1_max_weight: f64,
    /// sup |G'/G| per alpha.
    pub a2_sup: Vec<f64>,
    /// sup |G''/G| per alpha.
    pub a3_sup: Vec<f64>,
    /// max_k of the per-k gamma proxy
    /// `max(|dF/da|, |dG/da|/G, |dG'/da|/G)` per alpha.
    pub gamma_max: Vec<f64>,
    /// Fitted log-log growth exponent of gamma_k in k, per alpha.
    pub gamma_growth_exponent: Vec<f64>,
    /// Partial sums of `sum_k sup_x G_k(x) gamma_k`, per alpha.
    pub a7_partial_sum: Vec<f64>,
    /// Relative growth of the A7 partial sum over its last decade of k.
    pub a7_last_decade_increment: Vec<f64>,
    pub a7_cauchy: bool,
}

pub fn spot_check_a_conditions(
    alphas: &[f64],
    k_checked: usize,
    grid_points: usize,
) -> Result<AConditionsReport> {
    if alphas.is_empty() || k_checked < 4 || grid_points < 3 {
        return Err(Error::Domain(
            "non-empty alpha list and ranges required".into(),
        ));
    }
    let h_alpha = 1e-5;
    let xs: Vec<f64> = (0..grid_points)
        .map(|i| 0.5 + 0.5 * i as f64 / (grid_points - 1) as f64)
        .collect();

    let mut a1_max = 0.0_f64;
    let mut a2 = Vec::new();
    let mut a3 = Vec::new();
    let mut gmax = Vec::new();
    let mut ggrow = Vec::new();
    let mut a7 = Vec::new();
    let mut a7_inc = Vec::new();

    for &alpha in alphas {
        let map = LsvMap::lsv(alpha)?;
        let map_p = LsvMap::lsv(alpha + h_alpha)?;
        let map_m = LsvMap::lsv(alpha - h_alpha)?;
        let mut sup_a2 = 0.0_f64;
        let mut sup_a3 = 0.0_f64;
        let mut gamma = vec![1.0_f64; k_checked + 1];
        let mut sup_g = vec![0.0_f64; k_checked + 1];
        for &x in &xs {
            let mut st = DerivState::start(x);
            let mut st_p = DerivState::start(x);
            let mut st_m = DerivState::start(x);
            for k in 1..=k_checked {
                let (v, g, g1, g2) = st.into_branch();
                let (vp, gp, g1p, _) = st_p.into_branch();
                let (vm, gm, g1m, _) = st_m.into_branch();
                a1_max = a1_max.max(g);
                sup_a2 = sup_a2.max((g1 / g).abs());
                sup_a3 = sup_a3.max((g2 / g).abs());
                let da_f = (vp - vm) / (2.0 * h_alpha);
                let da_g = (gp - gm) / (2.0 * h_alpha);
                let da_g1 = (g1p - g1m) / (2.0 * h_alpha);
                let _ = v;
                let proxy = da_f.abs().max((da_g / g).abs()).max((da_g1 / g).abs());
                gamma[k] = gamma[k].max(proxy.max(1.0));
                sup_g[k] = sup_g[k].max(g);
                st.step(&map);
                st_p.step(&map_p);
                st_m.step(&map_m);
            }
        }
        let pts: Vec<(f64, f64)> = (2..=k_checked)
            .map(|k| ((k as f64).ln(), gamma[k].ln()))
            .collect();
        let growth = least_squares_slope(&pts);
        let total: f64 = (1..=k_checked).map(|k| sup_g[k] * gamma[k]).sum();
        let head: f64 = (1..=(k_checked * 9 / 10))
            .map(|k| sup_g[k] * gamma[k])
            .sum();
        a2.push(sup_a2);
        a3.push(sup_a3);
        gmax.push(gamma[1..].iter().cloned().fold(0.0, f64::max));
        ggrow.push(growth);
        a7.push(total);
        a7_inc.push((total - head) / total.max(f64::MIN_POSITIVE));
    }

    let a7_cauchy = a7_inc.iter().all(|&r| r < 0.05);
    Ok(AConditionsReport {
        alphas: alphas.to_vec(),
        k_checked,
        grid_points,
        alpha_step: h_alpha,
        a1_max_weight: a1_max,
        a2_sup: a2,
        a3_sup: a3,
        gamma_max: gmax,
        gamma_growth_exponent: ggrow,
        a7_partial_sum: a7,
        a7_last_decade_increment: a7_inc,
        a7_cauchy,
    })
}

/// Log-spaced integer samples in `[lo, hi]`, deduplicated and sorted.
pub(crate) fn log_spaced(lo: usize, hi: usize, count: usize) -> Vec<usize> {
    assert!(lo >= 1 && hi >= lo);
    let mut out = Vec::with_capacity(count + 1);
    let ratio = hi as f64 / lo as f64;
    for s in 0..=count {
        let v = (lo as f64 * ratio.powf(s as f64 / count as f64)).round() as usize;
        let v = v.clamp(lo, hi);
        if out.last() != Some(&v) {
            out.push(v);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interp::compensated_sum;

    fn sys(alpha: f64, k_max: usize) -> InducedSystem {
        InducedSystem::build(LsvMap::lsv(alpha).unwrap(), k_max, k_max).unwrap()
    }

    #[test]
    fn first_cylinder_is_right_quarter() {
        let s = sys(0.8, 64);
        let (a, b) = s.cylinder(1);
        assert!((a - 0.75).abs() < 1e-14);
        assert_eq!(b, 1.0);
    }

    #[test]
    fn second_cylinder_alpha_one() {
        let s = sys(1.0, 64);
        let (a, b) = s.cylinder(2);
        let y2 = (5f64.sqrt() - 1.0) / 4.0;
        assert!((a - (1.0 + y2) / 2.0).abs() < 1e-14);
        assert!((b - 0.75).abs() < 1e-14);
    }

    #[test]
    fn cylinder_lengths_telescope_exactly() {
        let s = sys(1.25, 4000);
        let sum = compensated_sum((1..=4000).map(|k| {
            let (a, b) = s.cylinder(k);
            b - a
        }));
        let expect = 0.5 - s.yseq.y(4000) / 2.0;
        assert!(
            (sum - expect).abs() <= 4.0 * f64::EPSILON,
            "{sum} vs {expect}"
        );
    }

    #[test]
    fn composed_branch_closed_forms() {
        let s = sys(1.0, 64);
        // k = 1: (1+x)/2.
        for x in [0.5, 0.7, 1.0] {
            assert_eq!(s.inverse_branch_composed(1, x).unwrap(), (1.0 + x) / 2.0);
        }
        // k = 2, x = 1: (1 + f_left^{-1}(1))/2 = 3/4.
        let v = s.inverse_branch_composed(2, 1.0).unwrap();
        assert!((v - 0.75).abs() < 1e-14, "{v}");
    }

    #[test]
    fn round_trip_through_forward_map() {
        // f^k(F_k^{-1}(x)) = x within 1e-10 for k <= 50.
        for alpha in [0.8, 1.0, 1.25] {
            let s = sys(alpha, 64);
            for k in [1usize, 2, 5, 17, 50] {
                for i in 0..9 {
                    let x = 0.5 + 0.5 * (i as f64 + 0.5) / 9.0;
                    let mut z = s.inverse_branch_composed(k, x).unwrap();
                    let (a, b) = s.cylinder(k);
                    assert!(
                        z >= a - 1e-12 && z <= b + 1e-12,
                        "k={k} image {z} outside cylinder [{a}, {b}]"
                    );
                    for _ in 0..k {
                        z = s.map.eval_unchecked(z);
                    }
                    assert!((z - x).abs() < 1e-10, "alpha={alpha} k={k}: {z} vs {x}");
                }
            }
        }
    }

    #[test]
    fn weight_closed_forms() {
        let s = sys(1.0, 64);
        // k = 1: right branch has slope 2.
        assert!((s.weight(1, 0.9).unwrap() - 0.5).abs() < 1e-15);
        // k = 2 at x = 1: (1/2) / f_left'(f_left^{-1}(1)) = (1/2) / f'(1/2).
        let expect = 0.5 / s.map.left_derivative(0.5);
        assert!((s.weight(2, 1.0).unwrap() - expect).abs() < 1e-14);
    }

    #[test]
    fn weight_matches_central_difference() {
        let s = sys(0.8, 64);
        let h = 1e-6;
        for k in [2usize, 5, 20] {
            let x = 0.8;
            let num = (s.inverse_branch_composed(k, x + h).unwrap()
                - s.inverse_branch_composed(k, x - h).unwrap())
                / (2.0 * h);
            let w = s.weight(k, x).unwrap();
            assert!(
                (num - w).abs() <= 1e-6 * w.max(1e-12),
                "k={k}: chain {w} vs fd {num}"
            );
        }
    }

    #[test]
    fn weight_integral_equals_cylinder_length() {
        // Change of variables: int_Y G_k dx = |C_k| (plain Lebesgue).
        let s = sys(0.8, 2000);
        for k in [1usize, 2, 10, 100, 1000] {
            let n = 2001;
            let mut acc = 0.0;
            // Composite Simpson over Y.
            for i in 0..n {
                let x = 0.5 + 0.5 * i as f64 / (n - 1) as f64;
                let w = s.weight(k, x).unwrap();
                let c = if i == 0 || i == n - 1 {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                acc += c * w;
            }
            acc *= 0.5 / (n - 1) as f64 / 3.0;
            let (a, b) = s.cylinder(k);
            assert!(
                (acc - (b - a)).abs() < 1e-8,
                "k={k}: integral {acc} vs length {}",
                b - a
            );
        }
    }

    #[test]
    fn sup_weight_decay_matches_exponent() {
        // Log-log slope of sup_x G_k over [1e2, 1e4] within 2% of -(1+1/alpha).
        for alpha in [0.8, 1.0, 1.25] {
            let s = sys(alpha, 10_000);
            let pts: Vec<(f64, f64)> = log_spaced(100, 10_000, 40)
                .into_iter()
                .map(|k| ((k as f64).ln(), s.sup_weight(k).ln()))
                .collect();
            let slope = least_squares_slope(&pts);
            let expect = -(1.0 + 1.0 / alpha);
            assert!(
                (slope - expect).abs() <= 0.02 * expect.abs(),
                "alpha={alpha}: slope {slope} vs {expect}"
            );
        }
    }

    #[test]
    fn weights_bounded_by_half() {
        let s = sys(1.25, 5000);
        let max = (1..=5000).map(|k| s.sup_weight(k)).fold(0.0f64, f64::max);
        assert!(max <= 0.5 + 1e-15, "{max}");
    }

    #[test]
    fn node_cache_matches_direct_evaluation() {
        let s = sys(0.9, 256);
        let nodes: Vec<f64> = (0..17).map(|i| 0.5 + 0.5 * i as f64 / 16.0).collect();
        let cache = s.cache_for_nodes(&nodes);
        for (i, &x) in nodes.iter().enumerate() {
            let (pos, wgt) = cache.row(i);
            for k in [1usize, 2, 7, 100, 256] {
                assert_eq!(pos[k - 1], s.inverse_branch_composed(k, x).unwrap());
                assert_eq!(wgt[k - 1], s.weight(k, x).unwrap());
            }
        }
    }

    #[test]
    fn cache_tail_weight_approximates_missing_mass() {
        // Compare the tail estimate at k_max = 500 against brute-force
        // continuation to 50_000.
        let s_small = sys(1.0, 500);
        let nodes = [0.5, 0.75, 1.0];
        let cache = s_small.cache_for_nodes(&nodes);
        let map = s_small.map;
        for (i, &x) in nodes.iter().enumerate() {
            let mut z = x;
            let mut d = 1.0;
            for _ in 1..=500 {
                z = map.left_inverse_unchecked(z);
                d /= map.left_derivative(z);
            }
            let mut brute = 0.0;
            for _ in 501..=50_000 {
                brute += 0.5 * d;
                z = map.left_inverse_unchecked(z);
                d /= map.left_derivative(z);
            }
            let est = cache.tail_weight[i];
            assert!(
                (est - brute).abs() <= 0.05 * brute,
                "x={x}: est {est:e} vs brute {brute:e}"
            );
        }
    }

    #[test]
    fn derivative_state_matches_finite_differences() {
        let map = LsvMap::lsv(0.8).unwrap();
        let k = 7;
        let x = 0.83;
        let h = 1e-5;
        let eval = |x: f64| {
            let mut st = DerivState::start(x);
            for _ in 1..k {
                st.step(&map);
            }
            st.into_branch()
        };
        let (_, d1, d2, d3) = eval(x);
        let (vp, d1p, d2p, _) = eval(x + h);
        let (vm, d1m, d2m, _) = eval(x - h);
        assert!(((vp - vm) / (2.0 * h) - d1).abs() < 1e-7 * d1.abs());
        assert!(((d1p - d1m) / (2.0 * h) - d2).abs() < 1e-5 * d2.abs().max(1e-8));
        assert!(((d2p - d2m) / (2.0 * h) - d3).abs() < 1e-4 * d3.abs().max(1e-8));
    }

    #[test]
    fn a_conditions_spot_checks() {
        let report = spot_check_a_conditions(&[0.8, 1.0, 1.25], 200, 9).unwrap();
        assert!(report.a1_max_weight <= 0.5 + 1e-12);
        for (i, &a2) in report.a2_sup.iter().enumerate() {
            assert!(a2.is_finite() && a2 < 50.0, "A2 sup {a2} at alpha idx {i}");
        }
        for &a3 in &report.a3_sup {
            assert!(a3.is_finite() && a3 < 500.0);
        }
        assert!(
            report.a7_cauchy,
            "A7 partial sums not settling: {:?}",
            report.a7_last_decade_increment
        );
    }
}
