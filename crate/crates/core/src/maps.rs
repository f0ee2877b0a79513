//! The parametrized interval map family.
//!
//! The concrete instance is the two-branch family
//!
//! ```text
//!   f_a(x) = x + 2^a x^(1+a)   on [0, 1/2]
//!   f_a(x) = 2x - 1            on (1/2, 1]
//! ```
//!
//! with a neutral fixed point at 0 and expansion coefficient `b = 2^a`. The
//! [`IntervalFamily`] trait is the general branch interface (piecewise
//! monotone C^3 branches, neutral left fixed point, uniformly expanding
//! remaining branches); only this instance ships.

use crate::error::{Error, Result};

/// Absolute tolerance for inverse-branch root finding.
pub const INVERSE_TOL: f64 = 1e-14;

/// Parameters of one member of the family.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MapParams {
    /// Neutrality exponent at the fixed point 0.
    pub alpha: f64,
    /// Expansion coefficient of the left branch: `f(x) = x + b x^(1+alpha)`.
    pub b_alpha: f64,
    /// Second-order exponent used in diagnostic decay targets; any value in
    /// `(0, alpha)` is admissible for this family (the left branch has no
    /// remainder term), so this is a reporting convention, not a model input.
    pub epsilon: f64,
}

/// Admissible parameter range for the family.
pub const ALPHA_MIN: f64 = 0.05;
pub const ALPHA_MAX: f64 = 2.0;

impl MapParams {
    /// Standard instance: `b = 2^alpha`, `epsilon = alpha/2`.
    pub fn lsv(alpha: f64) -> Result<Self> {
        Self::new(alpha, 2f64.powf(alpha), 0.5 * alpha)
    }

    pub fn new(alpha: f64, b_alpha: f64, epsilon: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) || !(ALPHA_MIN..=ALPHA_MAX).contains(&alpha) {
            return Err(Error::Domain(format!(
                "alpha must lie in [{ALPHA_MIN}, {ALPHA_MAX}], got {alpha}"
            )));
        }
        if !(b_alpha > 0.0 && b_alpha.is_finite()) {
            return Err(Error::Domain(format!(
                "b_alpha must be positive, got {b_alpha}"
            )));
        }
        if !(epsilon > 0.0 && epsilon < alpha) {
            return Err(Error::Domain(format!(
                "epsilon must lie in (0, alpha), got {epsilon}"
            )));
        }
        Ok(Self {
            alpha,
            b_alpha,
            epsilon,
        })
    }
}

/// General branch interface: branch domains, forward maps, derivatives up to
/// third order, and branch inverses defined on all of [0, 1].
///
/// Branch 0 fixes the origin with unit derivative there; every other branch
/// is uniformly expanding.
pub trait IntervalFamily {
    fn params(&self) -> &MapParams;
    fn branch_count(&self) -> usize;
    /// Closed domain of branch `i`.
    fn branch_domain(&self, i: usize) -> (f64, f64);
    fn forward(&self, i: usize, x: f64) -> f64;
    fn derivative(&self, i: usize, x: f64) -> f64;
    fn second_derivative(&self, i: usize, x: f64) -> f64;
    fn third_derivative(&self, i: usize, x: f64) -> f64;
    /// Inverse of branch `i`, defined for every `y` in [0, 1].
    fn inverse(&self, i: usize, y: f64) -> f64;
}

/// The shipped two-branch instance.
#[derive(Debug, Clone, Copy)]
pub struct LsvMap {
    pub params: MapParams,
}

impl LsvMap {
    pub fn new(params: MapParams) -> Self {
        Self { params }
    }

    pub fn lsv(alpha: f64) -> Result<Self> {
        Ok(Self::new(MapParams::lsv(alpha)?))
    }

    /// Left-branch value `x + b x^(1+alpha)` without domain checks.
    ///
    /// The two terms are nonnegative, so plain double addition is accurate to
    /// one ulp of the result; rounding past 1 at the branch endpoint is
    /// clamped (it cannot exceed a few ulp).
    #[inline]
    pub fn left(&self, x: f64) -> f64 {
        let v = x + self.params.b_alpha * x.powf(1.0 + self.params.alpha);
        if v > 1.0 {
            debug_assert!(v <= 1.0 + 4.0 * f64::EPSILON, "left branch overshoot {v:e}");
            1.0
        } else {
            v
        }
    }

    /// Derivative of the left branch, `1 + b (1+alpha) x^alpha`.
    #[inline]
    pub fn left_derivative(&self, x: f64) -> f64 {
        1.0 + self.params.b_alpha * (1.0 + self.params.alpha) * x.powf(self.params.alpha)
    }

    /// Full-map evaluation on [0, 1].
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain(format!("x = {x} outside [0, 1]")));
        }
        Ok(self.eval_unchecked(x))
    }

    #[inline]
    pub fn eval_unchecked(&self, x: f64) -> f64 {
        if x <= 0.5 {
            self.left(x)
        } else {
            2.0 * x - 1.0
        }
    }

    /// Full-map derivative (2 on the right branch).
    #[inline]
    pub fn derivative_at(&self, x: f64) -> f64 {
        if x <= 0.5 {
            self.left_derivative(x)
        } else {
            2.0
        }
    }

    /// Right-branch inverse `(1+y)/2` (one floating rounding).
    #[inline]
    pub fn right_inverse(&self, y: f64) -> f64 {
        0.5 * (1.0 + y)
    }

    /// Left-branch inverse: the unique `x` in [0, 1/2] with
    /// `x + b x^(1+alpha) = y`, found by bracketed Newton with bisection
    /// fallback to absolute tolerance [`INVERSE_TOL`].
    pub fn left_inverse(&self, y: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&y) {
            return Err(Error::Domain(format!("y = {y} outside [0, 1]")));
        }
        Ok(self.left_inverse_unchecked(y))
    }

    /// Same as [`Self::left_inverse`] without the domain check; hot path for
    /// backward-orbit iteration where `y` is already known to lie in [0, 1].
    pub fn left_inverse_unchecked(&self, y: f64) -> f64 {
        if y == 0.0 {
            return 0.0;
        }
        let b = self.params.b_alpha;
        let a1 = 1.0 + self.params.alpha;
        // g(x) = x + b x^(1+alpha) - y is increasing and convex on [0, 1/2],
        // g(0) < 0 <= g(x0) for x0 = min(y, 1/2). Newton from x0 descends
        // monotonically onto the root.
        let mut hi = y.min(0.5);
        let mut lo = 0.0_f64;
        let mut x = hi;
        for _ in 0..64 {
            let p = b * x.powf(a1);
            let g = x + p - y;
            if g > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let dg = 1.0 + a1 * p / x; // b (1+a) x^a = (1+a) p / x, x > 0 here
            let mut step = g / dg;
            let mut next = x - step;
            if next <= lo || next >= hi {
                next = 0.5 * (lo + hi);
                step = x - next;
            }
            x = next;
            if step.abs() <= INVERSE_TOL {
                // One polish step; quadratic convergence makes this ~exact.
                let p = b * x.powf(a1);
                let g = x + p - y;
                let dg = 1.0 + a1 * p / x;
                let polished = x - g / dg;
                return polished.clamp(0.0, 0.5);
            }
        }
        // Unreachable for valid inputs; the bracket always shrinks.
        debug_assert!(false, "left_inverse bisection fallback exhausted");
        0.5 * (lo + hi)
    }

    /// One laminar (left-branch) step with a Kahan-style carried correction.
    ///
    /// Deep in the neutral region the increment `b x^(1+alpha)` falls below
    /// one ulp of `x`; carrying the rounding error across steps keeps the
    /// orbit advancing instead of stagnating.
    #[inline]
    pub fn laminar_step(&self, x: f64, carry: f64) -> (f64, f64) {
        let inc = self.params.b_alpha * x.powf(1.0 + self.params.alpha);
        let y = inc + carry;
        let t = x + y;
        let new_carry = y - (t - x);
        if t > 1.0 {
            (1.0, 0.0)
        } else {
            (t, new_carry)
        }
    }
}

impl IntervalFamily for LsvMap {
    fn params(&self) -> &MapParams {
        &self.params
    }

    fn branch_count(&self) -> usize {
        2
    }

    fn branch_domain(&self, i: usize) -> (f64, f64) {
        match i {
            0 => (0.0, 0.5),
            1 => (0.5, 1.0),
            _ => panic!("branch index {i} out of range"),
        }
    }

    fn forward(&self, i: usize, x: f64) -> f64 {
        match i {
            0 => self.left(x),
            1 => 2.0 * x - 1.0,
            _ => panic!("branch index {i} out of range"),
        }
    }

    fn derivative(&self, i: usize, x: f64) -> f64 {
        match i {
            0 => self.left_derivative(x),
            1 => 2.0,
            _ => panic!("branch index {i} out of range"),
        }
    }

    fn second_derivative(&self, i: usize, x: f64) -> f64 {
        let MapParams { alpha, b_alpha, .. } = self.params;
        match i {
            0 => b_alpha * (1.0 + alpha) * alpha * x.powf(alpha - 1.0),
            1 => 0.0,
            _ => panic!("branch index {i} out of range"),
        }
    }

    fn third_derivative(&self, i: usize, x: f64) -> f64 {
        let MapParams { alpha, b_alpha, .. } = self.params;
        match i {
            0 => b_alpha * (1.0 + alpha) * alpha * (alpha - 1.0) * x.powf(alpha - 2.0),
            1 => 0.0,
            _ => panic!("branch index {i} out of range"),
        }
    }

    fn inverse(&self, i: usize, y: f64) -> f64 {
        match i {
            0 => self.left_inverse_unchecked(y),
            1 => self.right_inverse(y),
            _ => panic!("branch index {i} out of range"),
        }
    }
}

/// Backward orbit of 1 under the left-branch inverse:
/// `y_0 = 1`, `y_n = f^{-1}_{left}(y_{n-1})`.
#[derive(Debug, Clone)]
pub struct YSequence {
    pub values: Vec<f64>,
}

impl YSequence {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `y_n`; panics when `n` exceeds the computed range.
    #[inline]
    pub fn y(&self, n: usize) -> f64 {
        self.values[n]
    }

    pub fn max_index(&self) -> usize {
        self.values.len() - 1
    }
}

/// Computes `y_0 .. y_{n_max}` by repeated inversion. The closed asymptotic
/// form is never used here, so it stays available as an independent check.
pub fn y_sequence(map: &LsvMap, n_max: usize) -> Result<YSequence> {
    if n_max == 0 {
        return Err(Error::Domain("n_max must be >= 1".into()));
    }
    let mut values = Vec::with_capacity(n_max + 1);
    let mut y = 1.0_f64;
    values.push(y);
    for n in 1..=n_max {
        let next = map.left_inverse_unchecked(y);
        if !(next > 0.0 && next < y) {
            return Err(Error::RootFinding(format!(
                "y-sequence not strictly decreasing at n = {n}: {next} !< {y}"
            )));
        }
        values.push(next);
        y = next;
    }
    Ok(YSequence { values })
}

/// Diagnostics for the scaled limit `y_n (alpha b n)^(1/alpha) -> 1`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct YAsymptotics {
    pub window: (usize, usize),
    /// `sup_n |y_n (alpha b n)^(1/alpha) - 1|` over the window.
    pub max_scaled_deviation: f64,
    /// Log-log slope of the deviation over the window; `None` for a
    /// single-point window or when deviations vanish identically.
    pub fitted_correction_exponent: Option<f64>,
}

/// Compares the computed sequence against its leading asymptotic over an
/// index window and fits the decay rate of the residual.
pub fn check_y_asymptotics(
    seq: &YSequence,
    params: &MapParams,
    window: (usize, usize),
) -> Result<YAsymptotics> {
    let (lo, hi) = window;
    if lo == 0 || hi > seq.max_index() || lo > hi {
        return Err(Error::Domain(format!(
            "window ({lo}, {hi}) outside computed range 1..={}",
            seq.max_index()
        )));
    }
    let inv_alpha = 1.0 / params.alpha;
    let ab = params.alpha * params.b_alpha;
    let mut max_dev = 0.0_f64;
    let mut pts: Vec<(f64, f64)> = Vec::new();
    // Sampling ~128 log-spaced points keeps the fit cheap on wide windows.
    let samples = 128usize;
    let ratio = (hi as f64 / lo as f64).max(1.0);
    let mut last_n = 0usize;
    for s in 0..=samples {
        let n = ((lo as f64) * ratio.powf(s as f64 / samples as f64)).round() as usize;
        let n = n.clamp(lo, hi);
        if n == last_n {
            continue;
        }
        last_n = n;
        let dev = (seq.y(n) * (ab * n as f64).powf(inv_alpha) - 1.0).abs();
        max_dev = max_dev.max(dev);
        if dev > 0.0 {
            pts.push(((n as f64).ln(), dev.ln()));
        }
    }
    let fitted = if pts.len() >= 3 {
        Some(least_squares_slope(&pts))
    } else {
        None
    };
    Ok(YAsymptotics {
        window,
        max_scaled_deviation: max_dev,
        fitted_correction_exponent: fitted,
    })
}

/// Ordinary least-squares slope of `(x, y)` pairs.
pub(crate) fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for &(x, y) in pts {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    sxy / sxx
}
