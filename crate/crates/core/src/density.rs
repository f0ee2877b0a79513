//! Invariant density of the induced map on Y = [1/2, 1].
//!
//! The density solves `P(h) = h` for the weighted composition operator
//! `P(u)(x) = sum_k G_k(x) u(F_k^{-1}(x))`. The solver collocates on a
//! uniform grid, applies the truncated operator (with the residual-weight
//! correction from the node cache), renormalizes to unit mass with respect to
//! `lambda~ = 2 Lebesgue|_Y`, and power-iterates. A forward-simulated Ulam
//! matrix provides an independent oracle for the same density.

use crate::error::{Error, Result};
use crate::induced::{InducedSystem, NodeCache};
use crate::interp::{cubic_extrapolate, Cubic};
use crate::maps::LsvMap;
use crate::parallel;

/// Which reference measure density values refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum NormConvention {
    /// With respect to `lambda~ = 2 Lebesgue|_[1/2,1]` (unit total mass).
    WrtLambdaTilde,
    /// With respect to plain Lebesgue measure (values twice as large).
    WrtLebesgue,
}

/// Grid representation of the induced invariant density.
#[derive(Debug, Clone)]
pub struct DensityApprox {
    pub alpha: f64,
    pub grid: Vec<f64>,
    /// Density values with respect to `lambda~` (tagged by `norm_convention`).
    pub values: Vec<f64>,
    pub norm_convention: NormConvention,
    /// Sup-norm fixed-point residual of the normalized truncated operator.
    pub residual: f64,
    /// Sup-norm defect `|P(h) - h|` of the truncated operator before
    /// renormalization (the truncation eigenvalue defect).
    pub raw_residual: f64,
    pub iterations: usize,
    pub k_max: usize,
    /// Integral-test bound on the discarded sup-weight mass.
    pub tail_sup_bound: f64,
    interp: Cubic,
}

impl DensityApprox {
    pub fn interpolant(&self) -> &Cubic {
        &self.interp
    }

    /// Density value (wrt `lambda~`) at `x` in [1/2, 1].
    pub fn eval(&self, x: f64) -> f64 {
        self.interp.eval(x)
    }

    /// Lebesgue density of the induced measure: `rho = 2 h`.
    pub fn rho(&self, x: f64) -> f64 {
        2.0 * self.eval(x)
    }

    /// Boundary value at 1/2 by one-sided cubic extrapolation through the
    /// four leftmost nodes (the grid includes the endpoint, so this agrees
    /// with the nodal value up to interpolation of the same cubic).
    pub fn h_half(&self) -> f64 {
        cubic_extrapolate(&self.grid[..4], &self.values[..4], 0.5)
    }

    /// Induced-measure mass of `[1/2, x]` (integral of the density wrt
    /// `lambda~`).
    pub fn mass_to(&self, x: f64) -> f64 {
        2.0 * self.interp.integral_to(x)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }
}

/// Starting profile for the power iteration.
#[derive(Debug, Clone)]
pub enum Start {
    /// `u = 1`.
    Flat,
    /// `u(x) = 2(x - 1/2) + 1/2`, normalized; a deliberately different
    /// profile for fixed-point uniqueness checks.
    Ramp,
    Values(Vec<f64>),
}

/// Collocation solver bound to one induced system and grid.
pub struct DensitySolver<'a> {
    pub sys: &'a InducedSystem,
    pub nodes: Vec<f64>,
    pub cache: NodeCache,
}

impl<'a> DensitySolver<'a> {
    pub fn new(sys: &'a InducedSystem, grid_size: usize) -> Result<Self> {
        if grid_size < 64 {
            return Err(Error::Domain(format!(
                "grid_size must be >= 64, got {grid_size}"
            )));
        }
        let nodes: Vec<f64> = (0..grid_size)
            .map(|i| 0.5 + 0.5 * i as f64 / (grid_size - 1) as f64)
            .collect();
        let cache = sys.cache_for_nodes(&nodes);
        Ok(Self { sys, nodes, cache })
    }

    /// One application of the truncated operator with its tail correction:
    /// `sum_{k<=k_max} G_k(x) u(F_k^{-1}(x)) + tail_weight(x) u(1/2)`.
    ///
    /// The k-sum is Neumaier-compensated so the application is linear in `u`
    /// to a few ulp.
    pub fn apply(&self, u: &Cubic) -> Vec<f64> {
        let u_left = u.eval(self.nodes[0]);
        parallel::map_indexed(self.nodes.len(), |i| {
            let (pos, wgt) = self.cache.row(i);
            let mut sum = self.cache.tail_weight[i] * u_left;
            let mut comp = 0.0f64;
            for k in (0..pos.len()).rev() {
                let v = wgt[k] * u.eval(pos[k]);
                let t = sum + v;
                comp += if sum.abs() >= v.abs() {
                    (sum - t) + v
                } else {
                    (v - t) + sum
                };
                sum = t;
            }
            sum + comp
        })
    }

    /// Mass with respect to `lambda~` of grid values.
    pub fn lambda_tilde_integral(&self, values: &[f64]) -> Result<f64> {
        let p = Cubic::new(self.nodes.clone(), values.to_vec())?;
        Ok(2.0 * p.total_integral())
    }

    fn start_values(&self, start: &Start) -> Result<Vec<f64>> {
        match start {
            Start::Flat => Ok(vec![1.0; self.nodes.len()]),
            Start::Ramp => Ok(self.nodes.iter().map(|&x| 2.0 * (x - 0.5) + 0.5).collect()),
            Start::Values(v) => {
                if v.len() != self.nodes.len() {
                    return Err(Error::Domain("start profile length mismatch".into()));
                }
                Ok(v.clone())
            }
        }
    }

    /// Power iteration with renormalization each step until the sup-norm
    /// residual of the normalized operator drops below `tol`.
    pub fn solve(&self, tol: f64, max_iter: usize, start: Start) -> Result<DensityApprox> {
        if !(tol > 0.0) {
            return Err(Error::Domain("tol must be positive".into()));
        }
        let mut u = self.start_values(&start)?;
        let norm = self.lambda_tilde_integral(&u)?;
        for v in u.iter_mut() {
            *v /= norm;
        }

        let mut trace: Vec<f64> = Vec::new();
        let mut iterations = 0;
        loop {
            iterations += 1;
            let interp = Cubic::new(self.nodes.clone(), u.clone())?;
            let mut next = self.apply(&interp);
            let norm = self.lambda_tilde_integral(&next)?;
            for v in next.iter_mut() {
                *v /= norm;
            }
            let residual = u
                .iter()
                .zip(&next)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            trace.push(residual);
            u = next;
            if residual <= tol {
                break;
            }
            if iterations >= max_iter {
                let tail: Vec<String> = trace
                    .iter()
                    .rev()
                    .take(5)
                    .map(|r| format!("{r:.3e}"))
                    .collect();
                return Err(Error::NonConvergence {
                    context: format!(
                        "density power iteration at alpha = {} (last residuals: {})",
                        self.sys.alpha(),
                        tail.join(", ")
                    ),
                    residual,
                    iterations,
                });
            }
        }

        // Recorded residuals: one more application, measured both for the
        // normalized iteration map and for the raw truncated operator.
        let interp = Cubic::new(self.nodes.clone(), u.clone())?;
        let applied = self.apply(&interp);
        let norm = self.lambda_tilde_integral(&applied)?;
        let mut residual = 0.0f64;
        let mut raw_residual = 0.0f64;
        for (a, b) in u.iter().zip(&applied) {
            residual = residual.max((b / norm - a).abs());
            raw_residual = raw_residual.max((b - a).abs());
        }

        if u.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::NonConvergence {
                context: format!("density lost positivity at alpha = {}", self.sys.alpha()),
                residual,
                iterations,
            });
        }

        Ok(DensityApprox {
            alpha: self.sys.alpha(),
            grid: self.nodes.clone(),
            values: u,
            norm_convention: NormConvention::WrtLambdaTilde,
            residual,
            raw_residual,
            iterations,
            k_max: self.sys.k_max,
            tail_sup_bound: self.sys.tail_sup_bound,
            interp,
        })
    }
}

/// Convenience wrapper: build the system/grid and solve from the flat start.
pub fn solve_density(
    sys: &InducedSystem,
    grid_size: usize,
    tol: f64,
    max_iter: usize,
) -> Result<DensityApprox> {
    DensitySolver::new(sys, grid_size)?.solve(tol, max_iter, Start::Flat)
}

/// Piecewise-constant invariant density from the Ulam matrix of the induced
/// map, built by forward simulation only (no inverse branches), so it is an
/// independent oracle for the collocation solver.
#[derive(Debug, Clone)]
pub struct UlamDensity {
    pub alpha: f64,
    pub cells: usize,
    /// Invariant probability mass per cell (sums to 1).
    pub masses: Vec<f64>,
    /// Piecewise-constant density wrt `lambda~` (mass / cell lambda~-length).
    pub values: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
    pub sub_samples: usize,
}

/// Builds the Ulam transition matrix on `cells` uniform cells of Y by
/// endpoint-image quadrature of the first-return map (forward iteration
/// only), then extracts the dominant left fixed vector by power iteration.
///
/// Each cell is split into `sub_samples` segments. When a segment stays in
/// one return-time cylinder, the return map carries it monotonically onto an
/// interval, and the segment's mass is spread over landing cells in
/// proportion to image overlap; straddling segments fall back to endpoint
/// counting. Points within one return-time step cap of the neutral fixed
/// point (only the leftmost cell can reach it) are smeared uniformly, an
/// error far below the cell resolution.
pub fn ulam_oracle(
    map: &LsvMap,
    cells: usize,
    sub_samples: usize,
    tol: f64,
    max_iter: usize,
) -> Result<UlamDensity> {
    if cells < 256 {
        return Err(Error::Domain(format!("cells must be >= 256, got {cells}")));
    }
    if sub_samples == 0 {
        return Err(Error::Domain("sub_samples must be >= 1".into()));
    }
    let width = 0.5 / cells as f64;
    let step_cap = 2_000_000u64;
    // First-return image and time by forward iteration; None when capped.
    let first_return = |z0: f64| -> Option<(f64, u64)> {
        let mut z = 2.0 * z0 - 1.0;
        let mut steps = 0u64;
        while z < 0.5 {
            z = map.left(z);
            steps += 1;
            if steps >= step_cap {
                return None;
            }
        }
        Some((z.min(1.0), steps))
    };
    let seg_mass = 1.0 / sub_samples as f64;

    // Sparse rows: (landing cell, probability).
    let rows: Vec<Vec<(u32, f64)>> = parallel::map_indexed(cells, |i| {
        let a = 0.5 + i as f64 * width;
        let mut dense = vec![0.0f64; cells];
        let mut smear = 0.0f64;
        let cell_of = |v: f64| (((v - 0.5) / width) as usize).min(cells - 1);
        #[allow(clippy::needless_range_loop)] // j enters the cell arithmetic
        let spread = |dense: &mut [f64], u: f64, v: f64, mass: f64| {
            // Monotone image [u, v]: proportional overlap per cell.
            let j_lo = cell_of(u);
            let j_hi = cell_of(v);
            if j_lo == j_hi || v <= u {
                dense[j_lo] += mass;
            } else {
                let span = v - u;
                for j in j_lo..=j_hi {
                    let c_lo = 0.5 + j as f64 * width;
                    let c_hi = c_lo + width;
                    let overlap = (v.min(c_hi) - u.max(c_lo)).max(0.0);
                    dense[j] += mass * overlap / span;
                }
            }
        };
        let mut prev = first_return(a);
        for s in 1..=sub_samples {
            let z1 = a + s as f64 * width / sub_samples as f64;
            let z0 = a + (s - 1) as f64 * width / sub_samples as f64;
            let cur = first_return(z1);
            // Segments whose endpoints share a return time map monotonically;
            // straddling segments are bisected until each piece lies in one
            // cylinder or carries negligible mass.
            let mut stack = vec![(z0, z1, prev, cur, seg_mass)];
            while let Some((lo, hi, flo, fhi, mass)) = stack.pop() {
                match (flo, fhi) {
                    (Some((u, tu)), Some((v, tv))) if tu == tv => {
                        spread(&mut dense, u, v, mass);
                    }
                    (None, None) => smear += mass,
                    (flo, fhi) => {
                        if mass <= seg_mass / 256.0 {
                            for f in [flo, fhi] {
                                match f {
                                    Some((u, _)) => dense[cell_of(u)] += 0.5 * mass,
                                    None => smear += 0.5 * mass,
                                }
                            }
                        } else {
                            let mid = 0.5 * (lo + hi);
                            let fmid = first_return(mid);
                            stack.push((lo, mid, flo, fmid, 0.5 * mass));
                            stack.push((mid, hi, fmid, fhi, 0.5 * mass));
                        }
                    }
                }
            }
            prev = cur;
        }
        let mut row: Vec<(u32, f64)> = dense
            .into_iter()
            .enumerate()
            .filter(|(_, p)| *p > 0.0)
            .map(|(j, p)| (j as u32, p + smear / cells as f64))
            .collect();
        if smear > 0.0 {
            // Cells untouched above still receive their smear share.
            let touched: std::collections::HashSet<u32> = row.iter().map(|&(j, _)| j).collect();
            for j in 0..cells as u32 {
                if !touched.contains(&j) {
                    row.push((j, smear / cells as f64));
                }
            }
            row.sort_unstable_by_key(|&(j, _)| j);
        }
        row
    });

    // Left fixed vector by power iteration.
    let mut pi = vec![1.0 / cells as f64; cells];
    let mut iterations = 0;
    let residual = loop {
        iterations += 1;
        let mut next = vec![0.0f64; cells];
        for (i, row) in rows.iter().enumerate() {
            let w = pi[i];
            for &(j, p) in row {
                next[j as usize] += w * p;
            }
        }
        let total: f64 = next.iter().sum();
        for v in next.iter_mut() {
            *v /= total;
        }
        let res = pi
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        pi = next;
        if res <= tol {
            break res;
        }
        if iterations >= max_iter {
            return Err(Error::NonConvergence {
                context: format!("ulam power iteration at alpha = {}", map.params.alpha),
                residual: res,
                iterations,
            });
        }
    };

    let values: Vec<f64> = pi.iter().map(|m| m * cells as f64).collect();
    Ok(UlamDensity {
        alpha: map.params.alpha,
        cells,
        masses: pi,
        values,
        iterations,
        residual,
        sub_samples,
    })
}

/// `L1(lambda~)` distance between the cellwise projections of the solved
/// density and the Ulam density.
pub fn ulam_l1_gap(density: &DensityApprox, ulam: &UlamDensity) -> f64 {
    let cells = ulam.cells;
    let width = 0.5 / cells as f64;
    let mut gap = 0.0;
    let mut prev = 0.0;
    for (i, &mass) in ulam.masses.iter().enumerate() {
        let b = 0.5 + (i + 1) as f64 * width;
        let cum = density.mass_to(b);
        gap += ((cum - prev) - mass).abs();
        prev = cum;
    }
    gap
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::LsvMap;

    fn solver_for(alpha: f64, k_max: usize, grid: usize) -> (InducedSystem, usize) {
        let sys = InducedSystem::build(LsvMap::lsv(alpha).unwrap(), k_max, k_max).unwrap();
        (sys, grid)
    }

    #[test]
    fn transfer_of_one_preserves_mass() {
        // P(1)(x) = sum_k G_k(x); its lambda~ integral is 1 up to the
        // truncation-correction model error.
        let (sys, grid) = solver_for(0.8, 2000, 257);
        let solver = DensitySolver::new(&sys, grid).unwrap();
        let ones = Cubic::new(solver.nodes.clone(), vec![1.0; grid]).unwrap();
        let img = solver.apply(&ones);
        let mass = solver.lambda_tilde_integral(&img).unwrap();
        assert!((mass - 1.0).abs() < 1e-6, "mass {mass}");
    }

    #[test]
    fn operator_is_linear() {
        let (sys, grid) = solver_for(1.0, 500, 129);
        let solver = DensitySolver::new(&sys, grid).unwrap();
        let u: Vec<f64> = solver.nodes.iter().map(|x| 1.0 + (3.0 * x).sin()).collect();
        let v: Vec<f64> = solver.nodes.iter().map(|x| 0.5 + x * x).collect();
        let (a, b) = (0.37, -1.25);
        let combo: Vec<f64> = u.iter().zip(&v).map(|(x, y)| a * x + b * y).collect();
        let pu = solver.apply(&Cubic::new(solver.nodes.clone(), u).unwrap());
        let pv = solver.apply(&Cubic::new(solver.nodes.clone(), v).unwrap());
        let pc = solver.apply(&Cubic::new(solver.nodes.clone(), combo).unwrap());
        for i in 0..grid {
            let lin = a * pu[i] + b * pv[i];
            assert!(
                (pc[i] - lin).abs() <= 4.0 * f64::EPSILON * lin.abs().max(1.0),
                "node {i}: {} vs {}",
                pc[i],
                lin
            );
        }
    }

    #[test]
    fn integral_preserved_for_random_profiles() {
        let (sys, grid) = solver_for(1.0, 2000, 257);
        let solver = DensitySolver::new(&sys, grid).unwrap();
        let mut state = 0x9E3779B97F4A7C15u64;
        let mut rand = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..3 {
            let u: Vec<f64> = (0..grid).map(|_| 0.5 + rand()).collect();
            let u_max = u.iter().cloned().fold(0.0f64, f64::max);
            let before = solver.lambda_tilde_integral(&u).unwrap();
            let img = solver.apply(&Cubic::new(solver.nodes.clone(), u).unwrap());
            let after = solver.lambda_tilde_integral(&img).unwrap();
            // Mass is preserved up to the truncation residual bound; the
            // modeled correction leaves only a fraction of that bound.
            let budget = sys.tail_sup_bound * u_max;
            assert!(
                (after - before).abs() < budget,
                "{before} -> {after} (budget {budget:e})"
            );
        }
    }

    #[test]
    fn solve_reaches_tolerance_and_positivity() {
        let (sys, grid) = solver_for(0.8, 2000, 257);
        let solver = DensitySolver::new(&sys, grid).unwrap();
        let d = solver.solve(1e-10, 2000, Start::Flat).unwrap();
        assert!(d.residual <= 1e-10, "residual {}", d.residual);
        assert!(d.min_value() > 0.0);
        // Normalization: unit lambda~ mass.
        assert!((d.mass_to(1.0) - 1.0).abs() < 1e-12);
        // Two-sided bounds on a uniformly expanding induced system stay
        // moderate.
        assert!(
            d.max_value() < 5.0 && d.min_value() > 0.2,
            "bounds {} {}",
            d.min_value(),
            d.max_value()
        );
    }

    #[test]
    fn second_start_agrees() {
        let (sys, grid) = solver_for(1.0, 1000, 129);
        let solver = DensitySolver::new(&sys, grid).unwrap();
        let a = solver.solve(1e-10, 2000, Start::Flat).unwrap();
        let b = solver.solve(1e-10, 2000, Start::Ramp).unwrap();
        let diff = a
            .values
            .iter()
            .zip(&b.values)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0f64, f64::max);
        assert!(diff <= 1e-9, "start sensitivity {diff}");
    }

    #[test]
    fn fixed_point_invariant_under_apply() {
        let (sys, grid) = solver_for(1.0, 1000, 129);
        let solver = DensitySolver::new(&sys, grid).unwrap();
        let d = solver.solve(1e-11, 2000, Start::Flat).unwrap();
        let img = solver.apply(d.interpolant());
        let norm = solver.lambda_tilde_integral(&img).unwrap();
        for (a, b) in d.values.iter().zip(&img) {
            assert!((a - b / norm).abs() <= 1e-10);
        }
    }

    #[test]
    fn ulam_rows_are_stochastic_by_construction() {
        // Power-of-two sub-sampling makes each row an exact probability
        // vector; the oracle itself asserts the return guard.
        let map = LsvMap::lsv(0.8).unwrap();
        let u = ulam_oracle(&map, 256, 32, 1e-12, 10_000).unwrap();
        let total: f64 = u.masses.iter().sum();
        assert!((total - 1.0).abs() <= 16.0 * f64::EPSILON);
        assert!(u.masses.iter().all(|&m| m >= 0.0));
    }

    #[test]
    fn ulam_agrees_with_collocation_at_coarse_scale() {
        let (sys, grid) = solver_for(0.8, 2000, 257);
        let solver = DensitySolver::new(&sys, grid).unwrap();
        let d = solver.solve(1e-10, 2000, Start::Flat).unwrap();
        let u = ulam_oracle(&sys.map, 512, 128, 1e-12, 20_000).unwrap();
        let gap = ulam_l1_gap(&d, &u);
        assert!(gap < 2e-2, "L1 gap {gap}");
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn invariant_measure_matches_induced_orbit_frequencies() {
        // Empirical cell frequencies of a long induced-map orbit against the
        // solved masses, with batch-means error bars.
        let (sys, grid) = solver_for(0.8, 2000, 257);
        let solver = DensitySolver::new(&sys, grid).unwrap();
        let d = solver.solve(1e-10, 2000, Start::Flat).unwrap();
        let map = sys.map;

        let cells = 64usize;
        let width = 0.5 / cells as f64;
        let n_steps = 1_000_000usize;
        let batches = 1000usize;
        let mut freq = vec![0.0f64; cells];
        let mut batch_freq = vec![vec![0.0f64; batches]; cells];
        let mut z = 0.6180339887498949_f64; // arbitrary interior start
                                            // Burn-in.
        for _ in 0..10_000 {
            z = induced_step(&map, z);
        }
        let per_batch = n_steps / batches;
        for b in 0..batches {
            for _ in 0..per_batch {
                z = induced_step(&map, z);
                let c = (((z - 0.5) / width) as usize).min(cells - 1);
                freq[c] += 1.0;
                batch_freq[c][b] += 1.0;
            }
        }
        for c in 0..cells {
            freq[c] /= n_steps as f64;
            for b in 0..batches {
                batch_freq[c][b] /= per_batch as f64;
            }
        }
        let mut failures = 0;
        for c in 0..cells {
            let a = 0.5 + c as f64 * width;
            let mass = d.mass_to(a + width) - d.mass_to(a);
            let mean: f64 = batch_freq[c].iter().sum::<f64>() / batches as f64;
            let var: f64 = batch_freq[c]
                .iter()
                .map(|v| (v - mean) * (v - mean))
                .sum::<f64>()
                / (batches as f64 - 1.0);
            let se = (var / batches as f64).sqrt().max(1e-9);
            if (freq[c] - mass).abs() > 3.0 * se {
                failures += 1;
            }
        }
        // 3-sigma per cell: a few random exceedances among 64 cells are
        // expected; systematic disagreement is not.
        assert!(failures <= 4, "{failures} cells outside 3 SE");
    }

    fn induced_step(map: &LsvMap, z: f64) -> f64 {
        let mut w = 2.0 * z - 1.0;
        while w < 0.5 {
            w = map.left(w);
        }
        w.min(1.0)
    }
}
