//! Cubic Hermite interpolation with exact piecewise antiderivatives.
//!
//! Slopes come from fixed finite-difference stencils (fourth order in the
//! interior of uniform grids), so the interpolant is a linear function of the
//! data. Transfer-operator application must be linear to the last ulp, which
//! rules out shape-limited (monotone) slope rules.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Cubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
    /// Cumulative integral from `xs[0]` at every node.
    cum: Vec<f64>,
    /// Set when nodes are uniformly spaced: (x0, h).
    uniform: Option<(f64, f64)>,
}

impl Cubic {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        let n = xs.len();
        if n < 2 || ys.len() != n {
            return Err(Error::Domain(format!(
                "cubic interpolant needs >= 2 matching nodes, got {} xs / {} ys",
                n,
                ys.len()
            )));
        }
        for i in 1..n {
            if !(xs[i] > xs[i - 1]) {
                return Err(Error::Domain(
                    "interpolation nodes must be strictly increasing".into(),
                ));
            }
        }
        let h0 = xs[1] - xs[0];
        let uniform = (1..n)
            .all(|i| ((xs[i] - xs[i - 1]) - h0).abs() <= 1e-12 * h0)
            .then_some((xs[0], h0));
        let slopes = stencil_slopes(&xs, &ys, uniform.is_some());
        let mut cum = Vec::with_capacity(n);
        cum.push(0.0);
        for i in 0..n - 1 {
            let h = xs[i + 1] - xs[i];
            let seg = h * 0.5 * (ys[i] + ys[i + 1]) + h * h * (slopes[i] - slopes[i + 1]) / 12.0;
            cum.push(cum[i] + seg);
        }
        Ok(Self {
            xs,
            ys,
            slopes,
            cum,
            uniform,
        })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    #[inline]
    fn locate(&self, x: f64) -> usize {
        let n = self.xs.len();
        if let Some((x0, h)) = self.uniform {
            let i = ((x - x0) / h).floor() as isize;
            return i.clamp(0, n as isize - 2) as usize;
        }
        match self.xs.partition_point(|&v| v <= x) {
            0 => 0,
            k => (k - 1).min(n - 2),
        }
    }

    /// Interpolant value; clamps to the boundary node values outside the grid
    /// (callers only leave the domain by floating rounding).
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.xs[0] {
            return self.ys[0];
        }
        let n = self.xs.len();
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        let i = self.locate(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * self.ys[i]
            + (t3 - 2.0 * t2 + t) * h * self.slopes[i]
            + (-2.0 * t3 + 3.0 * t2) * self.ys[i + 1]
            + (t3 - t2) * h * self.slopes[i + 1]
    }

    /// Integral of the interpolant from `xs[0]` to `x` (clamped to the grid).
    pub fn integral_to(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return 0.0;
        }
        if x >= self.xs[n - 1] {
            return self.cum[n - 1];
        }
        let i = self.locate(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let t4 = t3 * t;
        let part = (0.5 * t4 - t3 + t) * self.ys[i]
            + (0.25 * t4 - 2.0 * t3 / 3.0 + 0.5 * t2) * h * self.slopes[i]
            + (-0.5 * t4 + t3) * self.ys[i + 1]
            + (0.25 * t4 - t3 / 3.0) * h * self.slopes[i + 1];
        self.cum[i] + h * part
    }

    /// Integral over the whole grid.
    pub fn total_integral(&self) -> f64 {
        *self.cum.last().unwrap()
    }
}

/// Finite-difference slopes, linear in the data. Fourth-order centered in
/// the interior of uniform grids; parabolic (three-point) otherwise and near
/// the boundary.
fn stencil_slopes(xs: &[f64], ys: &[f64], uniform: bool) -> Vec<f64> {
    let n = xs.len();
    if n == 2 {
        let d = (ys[1] - ys[0]) / (xs[1] - xs[0]);
        return vec![d, d];
    }
    let mut m = vec![0.0; n];
    for i in 1..n - 1 {
        if uniform && n >= 6 && i >= 2 && i <= n - 3 {
            let h = xs[1] - xs[0];
            m[i] = (ys[i - 2] - 8.0 * ys[i - 1] + 8.0 * ys[i + 1] - ys[i + 2]) / (12.0 * h);
        } else {
            // Derivative of the parabola through the three nearest nodes.
            let h0 = xs[i] - xs[i - 1];
            let h1 = xs[i + 1] - xs[i];
            let d0 = (ys[i] - ys[i - 1]) / h0;
            let d1 = (ys[i + 1] - ys[i]) / h1;
            m[i] = (d0 * h1 + d1 * h0) / (h0 + h1);
        }
    }
    m[0] = parabola_endpoint(xs[0], xs[1], xs[2], ys[0], ys[1], ys[2]);
    m[n - 1] = parabola_endpoint(
        xs[n - 1],
        xs[n - 2],
        xs[n - 3],
        ys[n - 1],
        ys[n - 2],
        ys[n - 3],
    );
    m
}

/// Derivative at `x0` of the parabola through `(x0,y0), (x1,y1), (x2,y2)`.
fn parabola_endpoint(x0: f64, x1: f64, x2: f64, y0: f64, y1: f64, y2: f64) -> f64 {
    let d01 = (y1 - y0) / (x1 - x0);
    let d02 = (y2 - y0) / (x2 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    d01 + d02 - d12
}

/// Value at `x` of the cubic through the four leftmost nodes (one-sided
/// Lagrange extrapolation; reduces to `ys[0]` when `x == xs[0]`).
pub fn cubic_extrapolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    assert!(xs.len() >= 4 && ys.len() >= 4);
    let mut acc = 0.0;
    for j in 0..4 {
        let mut l = 1.0;
        for k in 0..4 {
            if k != j {
                l *= (x - xs[k]) / (xs[j] - xs[k]);
            }
        }
        acc += l * ys[j];
    }
    acc
}

/// Neumaier-compensated sum; used where millions of terms meet 1e-12 targets.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect()
    }

    #[test]
    fn reproduces_nodes_exactly() {
        let xs = uniform_grid(0.5, 1.0, 33);
        let ys: Vec<f64> = xs.iter().map(|x| 1.0 / x).collect();
        let p = Cubic::new(xs.clone(), ys.clone()).unwrap();
        for (x, y) in xs.iter().zip(&ys) {
            assert!((p.eval(*x) - y).abs() < 1e-15);
        }
    }

    #[test]
    fn interpolation_error_shrinks_cubically() {
        let f = |x: f64| (2.0 * x).sin() + 2.0;
        let err = |n: usize| {
            let xs = uniform_grid(0.0, 1.0, n);
            let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
            let p = Cubic::new(xs, ys).unwrap();
            (0..1000)
                .map(|i| {
                    let x = i as f64 / 999.0;
                    (p.eval(x) - f(x)).abs()
                })
                .fold(0.0f64, f64::max)
        };
        let e1 = err(33);
        let e2 = err(65);
        assert!(e2 < e1 / 6.0, "e1={e1:e} e2={e2:e}");
    }

    #[test]
    fn interpolation_is_linear_in_data() {
        let xs = uniform_grid(0.5, 1.0, 65);
        let u: Vec<f64> = xs.iter().map(|&x| (5.0 * x).sin()).collect();
        let v: Vec<f64> = xs.iter().map(|&x| x * x - 0.3).collect();
        let (a, b) = (1.7, -0.4);
        let combo: Vec<f64> = u.iter().zip(&v).map(|(p, q)| a * p + b * q).collect();
        let pu = Cubic::new(xs.clone(), u).unwrap();
        let pv = Cubic::new(xs.clone(), v).unwrap();
        let pc = Cubic::new(xs.clone(), combo).unwrap();
        for i in 0..500 {
            let x = 0.5 + 0.5 * (i as f64 + 0.3) / 500.0;
            let lin = a * pu.eval(x) + b * pv.eval(x);
            let direct = pc.eval(x);
            assert!(
                (direct - lin).abs() <= 8.0 * f64::EPSILON * direct.abs().max(1.0),
                "x={x}: {direct} vs {lin}"
            );
        }
    }

    #[test]
    fn smooth_positive_data_stays_positive() {
        let xs = uniform_grid(0.5, 1.0, 129);
        let ys: Vec<f64> = xs
            .iter()
            .map(|&x| 0.4 + 1.0 / x + 0.2 * (9.0 * x).sin())
            .collect();
        let p = Cubic::new(xs, ys).unwrap();
        for i in 0..5000 {
            let x = 0.5 + 0.5 * i as f64 / 4999.0;
            assert!(p.eval(x) > 0.0);
        }
    }

    #[test]
    fn integral_matches_analytic() {
        let xs = uniform_grid(0.5, 1.0, 257);
        let ys: Vec<f64> = xs.iter().map(|x| 1.0 / x).collect();
        let p = Cubic::new(xs, ys).unwrap();
        let total = p.total_integral();
        assert!((total - 2f64.ln()).abs() < 1e-10, "{total}");
        let part = p.integral_to(0.75);
        assert!((part - 1.5f64.ln()).abs() < 1e-10, "{part}");
    }

    #[test]
    fn integral_to_is_monotone_for_positive_data() {
        let xs = uniform_grid(0.5, 1.0, 65);
        let ys: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let p = Cubic::new(xs, ys).unwrap();
        let mut prev = -1.0;
        for i in 0..500 {
            let x = 0.5 + 0.5 * i as f64 / 499.0;
            let v = p.integral_to(x);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn cubic_extrapolation_recovers_cubics() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let f = |x: f64| 2.0 - x + 0.5 * x * x - 0.125 * x * x * x;
        let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        let v = cubic_extrapolate(&xs, &ys, 0.25);
        assert!((v - f(0.25)).abs() < 1e-12);
        assert_eq!(cubic_extrapolate(&xs, &ys, 1.0), ys[0]);
    }

    #[test]
    fn compensated_sum_beats_naive() {
        let n = 10_000_000usize;
        let values: Vec<f64> = (1..=n).map(|k| 1.0 / (k as f64 * k as f64)).collect();
        let comp = compensated_sum(values.iter().copied());
        let exact = std::f64::consts::PI * std::f64::consts::PI / 6.0 - 1.0 / n as f64
            + 0.5 / (n as f64 * n as f64);
        // Tail of the Basel series: sum_{k>n} 1/k^2 = 1/n - 1/(2n^2) + O(n^-3).
        assert!((comp - exact).abs() < 1e-13, "comp={comp} exact~{exact}");
    }
}
