//! Observables with declared Hölder data at the neutral fixed point.
//!
//! Response formulas only ever consume `phi - phi(0)`; the declared
//! `(eta, C)` with `|phi(x) - phi(0)| <= C x^eta` controls branch-sum tail
//! bounds, so it is spot-checked at construction.

use crate::error::{Error, Result};
use crate::expr::{self, Expr};
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

#[derive(Clone)]
enum Kind {
    Identity,
    Square,
    Sqrt,
    CosTwoPi,
    Expr(Arc<Expr>),
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

#[derive(Clone)]
pub struct Potential {
    pub name: String,
    kind: Kind,
    pub holder_exponent: f64,
    pub holder_constant: f64,
    pub value_at_zero: f64,
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Potential")
            .field("name", &self.name)
            .field("eta", &self.holder_exponent)
            .field("C", &self.holder_constant)
            .finish()
    }
}

impl Potential {
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::Identity => x,
            Kind::Square => x * x,
            Kind::Sqrt => x.sqrt(),
            Kind::CosTwoPi => (2.0 * PI * x).cos(),
            Kind::Expr(e) => e.eval(x),
            Kind::Custom(f) => f(x),
        }
    }

    /// `phi(x) - phi(0)`, the only combination response formulas use.
    #[inline]
    pub fn centered(&self, x: f64) -> f64 {
        self.eval(x) - self.value_at_zero
    }

    /// phi(x) = x.
    pub fn x() -> Self {
        Self {
            name: "x".into(),
            kind: Kind::Identity,
            holder_exponent: 1.0,
            holder_constant: 1.0,
            value_at_zero: 0.0,
        }
    }

    /// phi(x) = x^2.
    pub fn x_squared() -> Self {
        Self {
            name: "x^2".into(),
            kind: Kind::Square,
            holder_exponent: 1.0,
            holder_constant: 1.0,
            value_at_zero: 0.0,
        }
    }

    /// phi(x) = sqrt(x), Hölder exponent 1/2.
    pub fn sqrt_x() -> Self {
        Self {
            name: "sqrt(x)".into(),
            kind: Kind::Sqrt,
            holder_exponent: 0.5,
            holder_constant: 1.0,
            value_at_zero: 0.0,
        }
    }

    /// phi(x) = cos(2 pi x); `|cos(2 pi x) - 1| <= 2 pi^2 x`.
    pub fn cos_two_pi() -> Self {
        Self {
            name: "cos(2*pi*x)".into(),
            kind: Kind::CosTwoPi,
            holder_exponent: 1.0,
            holder_constant: 2.0 * PI * PI,
            value_at_zero: 1.0,
        }
    }

    pub fn builtin(tag: &str) -> Result<Self> {
        match tag {
            "x" => Ok(Self::x()),
            "x2" | "x^2" => Ok(Self::x_squared()),
            "sqrt" | "sqrt(x)" => Ok(Self::sqrt_x()),
            "cos2pi" | "cos(2*pi*x)" => Ok(Self::cos_two_pi()),
            other => Err(Error::Config(format!(
                "unknown builtin potential `{other}` (expected x, x2, sqrt, cos2pi)"
            ))),
        }
    }

    /// Parses an expression in `x` with declared Hölder data and spot-checks
    /// the Hölder bound at 0 before accepting it.
    pub fn from_expression(src: &str, eta: f64, c: f64) -> Result<Self> {
        let ast = expr::parse(src)?;
        let value_at_zero = ast.eval(0.0);
        if !value_at_zero.is_finite() {
            return Err(Error::Config(format!(
                "expression `{src}` is not finite at 0"
            )));
        }
        let p = Self {
            name: src.to_string(),
            kind: Kind::Expr(Arc::new(ast)),
            holder_exponent: eta,
            holder_constant: c,
            value_at_zero,
        };
        p.validate_holder()?;
        Ok(p)
    }

    /// Wraps an arbitrary function with declared Hölder data (spot-checked).
    pub fn custom(
        name: &str,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        eta: f64,
        c: f64,
    ) -> Result<Self> {
        let value_at_zero = f(0.0);
        let p = Self {
            name: name.to_string(),
            kind: Kind::Custom(Arc::new(f)),
            holder_exponent: eta,
            holder_constant: c,
            value_at_zero,
        };
        p.validate_holder()?;
        Ok(p)
    }

    /// Spot-checks `|phi(x) - phi(0)| <= C x^eta` on 10^4 points of [0, 1].
    pub fn validate_holder(&self) -> Result<()> {
        if !(self.holder_exponent > 0.0) || !(self.holder_constant > 0.0) {
            return Err(Error::Config(format!(
                "potential `{}` needs positive Hölder data, got eta = {}, C = {}",
                self.name, self.holder_exponent, self.holder_constant
            )));
        }
        let n = 10_000;
        for i in 1..=n {
            let x = i as f64 / n as f64;
            let lhs = self.centered(x).abs();
            let bound = self.holder_constant * x.powf(self.holder_exponent);
            if !(lhs <= bound * (1.0 + 1e-12) + 1e-300) {
                return Err(Error::Config(format!(
                    "potential `{}` violates its Hölder bound at x = {x}: |dphi| = {lhs} > {bound}",
                    self.name
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_validate() {
        for p in [
            Potential::x(),
            Potential::x_squared(),
            Potential::sqrt_x(),
            Potential::cos_two_pi(),
        ] {
            p.validate_holder().unwrap();
        }
    }

    #[test]
    fn centered_at_zero_vanishes() {
        let p = Potential::cos_two_pi();
        assert_eq!(p.centered(0.0), 0.0);
        assert!((p.centered(0.5) - (-2.0)).abs() < 1e-15);
    }

    #[test]
    fn expression_round_trip() {
        let p = Potential::from_expression("x - 0.25*x^2", 1.0, 1.5).unwrap();
        assert!((p.eval(0.5) - (0.5 - 0.0625)).abs() < 1e-15);
        assert_eq!(p.value_at_zero, 0.0);
    }

    #[test]
    fn holder_violation_rejected() {
        // sqrt(x) declared with eta = 1 fails near 0.
        let err = Potential::from_expression("sqrt(x)", 1.0, 1.0);
        assert!(err.is_err());
    }

    #[test]
    fn custom_potentials_check_bounds() {
        let p = Potential::custom("bump", |x| x * (1.0 - x), 1.0, 1.0).unwrap();
        assert_eq!(p.value_at_zero, 0.0);
        assert!(Potential::custom("bad", |x| x.powf(0.25), 0.5, 1.0).is_err());
    }
}
