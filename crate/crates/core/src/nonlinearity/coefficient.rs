use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Scalar coefficient function `c(r)` on `[0, ∞)` with a limit at infinity.
///
/// The catalog only admits shapes whose monotonicity and limit are known
/// in closed form: constants, exponential approaches `c∞ + a e^{-b r}`,
/// and rational approaches `c∞ + a (1 + r)^{-γ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum CoefficientFn {
    Constant {
        c_inf: f64,
    },
    ExpApproach {
        c_inf: f64,
        a: f64,
        b_or_gamma: f64,
    },
    RationalApproach {
        c_inf: f64,
        a: f64,
        b_or_gamma: f64,
    },
}

/// Direction of a coefficient function, derived from its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Monotonicity {
    Constant,
    Nonincreasing,
    Nondecreasing,
}

impl CoefficientFn {
    pub fn constant(c: f64) -> Self {
        CoefficientFn::Constant { c_inf: c }
    }

    pub fn validate(&self) -> Result<()> {
        let (c_inf, a, rate) = match *self {
            CoefficientFn::Constant { c_inf } => (c_inf, 0.0, 1.0),
            CoefficientFn::ExpApproach { c_inf, a, b_or_gamma }
            | CoefficientFn::RationalApproach { c_inf, a, b_or_gamma } => (c_inf, a, b_or_gamma),
        };
        if !(c_inf.is_finite() && a.is_finite() && rate.is_finite()) {
            return Err(Error::InvalidSpec("non-finite coefficient parameter".into()));
        }
        if rate <= 0.0 {
            return Err(Error::InvalidSpec(format!(
                "coefficient decay rate must be positive, got {rate}"
            )));
        }
        Ok(())
    }

    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            CoefficientFn::Constant { c_inf } => c_inf,
            CoefficientFn::ExpApproach { c_inf, a, b_or_gamma } => c_inf + a * (-b_or_gamma * r).exp(),
            CoefficientFn::RationalApproach { c_inf, a, b_or_gamma } => {
                c_inf + a * (1.0 + r).powf(-b_or_gamma)
            }
        }
    }

    pub fn deriv(&self, r: f64) -> f64 {
        match *self {
            CoefficientFn::Constant { .. } => 0.0,
            CoefficientFn::ExpApproach { a, b_or_gamma, .. } => {
                -a * b_or_gamma * (-b_or_gamma * r).exp()
            }
            CoefficientFn::RationalApproach { a, b_or_gamma, .. } => {
                -a * b_or_gamma * (1.0 + r).powf(-b_or_gamma - 1.0)
            }
        }
    }

    /// Limit of `c(r)` as `r -> ∞`.
    pub fn limit(&self) -> f64 {
        match *self {
            CoefficientFn::Constant { c_inf }
            | CoefficientFn::ExpApproach { c_inf, .. }
            | CoefficientFn::RationalApproach { c_inf, .. } => c_inf,
        }
    }

    /// The family's decay factor at radius `r`, so that
    /// `|c(r) - c∞| = |a| * decay(r)` identically.
    pub fn decay(&self, r: f64) -> f64 {
        match *self {
            CoefficientFn::Constant { .. } => 0.0,
            CoefficientFn::ExpApproach { b_or_gamma, .. } => (-b_or_gamma * r).exp(),
            CoefficientFn::RationalApproach { b_or_gamma, .. } => (1.0 + r).powf(-b_or_gamma),
        }
    }

    pub fn is_constant(&self) -> bool {
        match *self {
            CoefficientFn::Constant { .. } => true,
            CoefficientFn::ExpApproach { a, .. } | CoefficientFn::RationalApproach { a, .. } => {
                a == 0.0
            }
        }
    }

    /// Derived from the sign of `a`: positive deviations decay toward the
    /// limit from above (nonincreasing), negative ones from below.
    pub fn monotonicity(&self) -> Monotonicity {
        let a = match *self {
            CoefficientFn::Constant { .. } => 0.0,
            CoefficientFn::ExpApproach { a, .. } | CoefficientFn::RationalApproach { a, .. } => a,
        };
        if a == 0.0 {
            Monotonicity::Constant
        } else if a > 0.0 {
            Monotonicity::Nonincreasing
        } else {
            Monotonicity::Nondecreasing
        }
    }

    pub fn is_nonincreasing(&self) -> bool {
        matches!(
            self.monotonicity(),
            Monotonicity::Constant | Monotonicity::Nonincreasing
        )
    }

    pub fn is_nondecreasing(&self) -> bool {
        matches!(
            self.monotonicity(),
            Monotonicity::Constant | Monotonicity::Nondecreasing
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn limit_is_approached_at_the_declared_rate() {
        let cs = [
            CoefficientFn::ExpApproach { c_inf: 1.0, a: 1.0, b_or_gamma: 1.0 },
            CoefficientFn::ExpApproach { c_inf: -1.0, a: -2.0, b_or_gamma: 0.5 },
            CoefficientFn::RationalApproach { c_inf: 2.0, a: 0.7, b_or_gamma: 1.5 },
        ];
        for c in cs {
            for r in [0.0, 1.0, 10.0, 100.0, 1000.0] {
                let a = match c {
                    CoefficientFn::ExpApproach { a, .. }
                    | CoefficientFn::RationalApproach { a, .. } => a,
                    _ => 0.0,
                };
                let dev = (c.eval(r) - c.limit()).abs();
                assert!(dev <= a.abs() * c.decay(r) * (1.0 + 1e-12) + 1e-300);
            }
        }
    }

    #[test]
    fn monotonicity_matches_derivative_sign() {
        let cs = [
            CoefficientFn::constant(3.0),
            CoefficientFn::ExpApproach { c_inf: 1.0, a: 1.0, b_or_gamma: 1.0 },
            CoefficientFn::ExpApproach { c_inf: 0.0, a: -1.0, b_or_gamma: 1.0 },
            CoefficientFn::RationalApproach { c_inf: 1.0, a: -0.3, b_or_gamma: 2.0 },
        ];
        for c in cs {
            for i in 0..64 {
                let r = 1e-3 * (1000.0f64 / 1e-3).powf(i as f64 / 63.0);
                let d = c.deriv(r);
                match c.monotonicity() {
                    Monotonicity::Constant => assert_eq!(d, 0.0),
                    Monotonicity::Nonincreasing => assert!(d <= 0.0),
                    Monotonicity::Nondecreasing => assert!(d >= 0.0),
                }
            }
        }
    }

    #[test]
    fn rejects_nonpositive_rate() {
        assert!(CoefficientFn::ExpApproach { c_inf: 1.0, a: 1.0, b_or_gamma: 0.0 }
            .validate()
            .is_err());
        assert!(CoefficientFn::RationalApproach { c_inf: 1.0, a: 1.0, b_or_gamma: -2.0 }
            .validate()
            .is_err());
    }
}
