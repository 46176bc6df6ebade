//! The closed catalog of admissible nonlinearities `g(r, z)`.
//!
//! Every family carries its primitive `G(r, z)` (normalized so that
//! `G(r, 0) = 0`) and the z-derivative in closed form. Keeping the
//! catalog closed is what makes oddness exact and primitives exact;
//! arbitrary expressions would force numeric primitives everywhere.

mod coefficient;
mod report;

pub use coefficient::{CoefficientFn, Monotonicity};
pub use report::{
    CoefficientCheck, GrowthWindow, HypothesisReport, SignChange, SlopeCheck,
};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Search cap for the numeric root bracketing in [`NonlinearitySpec::alpha0_numeric`].
pub const ALPHA0_SEARCH_CAP: f64 = 1e6;

/// A nonlinearity from the catalog.
///
/// * `Saturable` — `g(r, z) = -λ(r) z + z / (s(r) + z²)`
/// * `DefocusingPower` / `FocusingPower` — `g(r, z) = k(r)² z + Q(r) |z|^{p-2} z`
///   (the family tag records the intended sign of `Q`; the formula is shared)
/// * `ConcaveConvex` — `g(z) = λ |z|^{q-2} z + μ |z|^{p-2} z`, `1 < q < 2 < p`
/// * `LinearHelmholtz` — `g(z) = k² z`
/// * `PureDamping` — `g(z) = -z`, the counterexample input with `g(z) z < 0`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum NonlinearitySpec {
    Saturable {
        lambda: CoefficientFn,
        s: CoefficientFn,
    },
    DefocusingPower {
        k: CoefficientFn,
        q: CoefficientFn,
        p: f64,
    },
    FocusingPower {
        k: CoefficientFn,
        q: CoefficientFn,
        p: f64,
    },
    ConcaveConvex {
        lambda: f64,
        mu: f64,
        q: f64,
        p: f64,
    },
    LinearHelmholtz {
        k: f64,
    },
    PureDamping,
}

impl NonlinearitySpec {
    /// Autonomous saturable model with constant coefficients.
    pub fn saturable(lambda: f64, s: f64) -> Self {
        NonlinearitySpec::Saturable {
            lambda: CoefficientFn::constant(lambda),
            s: CoefficientFn::constant(s),
        }
    }

    /// Autonomous `k² z - |z|^{p-2} z`.
    pub fn defocusing_power(k: f64, p: f64) -> Self {
        NonlinearitySpec::DefocusingPower {
            k: CoefficientFn::constant(k),
            q: CoefficientFn::constant(-1.0),
            p,
        }
    }

    /// Autonomous `k² z + |z|^{p-2} z`.
    pub fn focusing_power(k: f64, p: f64) -> Self {
        NonlinearitySpec::FocusingPower {
            k: CoefficientFn::constant(k),
            q: CoefficientFn::constant(1.0),
            p,
        }
    }

    pub fn linear(k: f64) -> Self {
        NonlinearitySpec::LinearHelmholtz { k }
    }

    /// Structural parameter constraints for each family.
    pub fn validate_params(&self) -> Result<()> {
        match self {
            NonlinearitySpec::Saturable { lambda, s } => {
                lambda.validate()?;
                s.validate()?;
                if s.eval(0.0) <= 0.0 || s.limit() <= 0.0 {
                    return Err(Error::InvalidSpec("saturation s(r) must be positive".into()));
                }
                Ok(())
            }
            NonlinearitySpec::DefocusingPower { k, q, p }
            | NonlinearitySpec::FocusingPower { k, q, p } => {
                k.validate()?;
                q.validate()?;
                if !p.is_finite() || *p <= 2.0 {
                    return Err(Error::InvalidSpec(format!("exponent p must exceed 2, got {p}")));
                }
                Ok(())
            }
            NonlinearitySpec::ConcaveConvex { lambda, mu, q, p } => {
                if !(lambda.is_finite() && mu.is_finite() && q.is_finite() && p.is_finite()) {
                    return Err(Error::InvalidSpec("non-finite parameter".into()));
                }
                if *lambda <= 0.0 {
                    return Err(Error::InvalidSpec("concave coefficient must be positive".into()));
                }
                if !(1.0 < *q && *q < 2.0 && 2.0 < *p) {
                    return Err(Error::InvalidSpec(format!(
                        "exponents must satisfy 1 < q < 2 < p, got q={q}, p={p}"
                    )));
                }
                Ok(())
            }
            NonlinearitySpec::LinearHelmholtz { k } => {
                if !k.is_finite() || *k <= 0.0 {
                    return Err(Error::InvalidSpec("linear coefficient k must be positive".into()));
                }
                Ok(())
            }
            NonlinearitySpec::PureDamping => Ok(()),
        }
    }

    /// `g(r, z)`. Odd in `z` by construction, exactly so in floating point.
    pub fn g(&self, r: f64, z: f64) -> f64 {
        match self {
            NonlinearitySpec::Saturable { lambda, s } => {
                -lambda.eval(r) * z + z / (s.eval(r) + z * z)
            }
            NonlinearitySpec::DefocusingPower { k, q, p }
            | NonlinearitySpec::FocusingPower { k, q, p } => {
                let kk = k.eval(r);
                kk * kk * z + q.eval(r) * z.abs().powf(p - 2.0) * z
            }
            NonlinearitySpec::ConcaveConvex { lambda, mu, q, p } => {
                if z == 0.0 {
                    return 0.0;
                }
                lambda * z.abs().powf(q - 2.0) * z + mu * z.abs().powf(p - 2.0) * z
            }
            NonlinearitySpec::LinearHelmholtz { k } => k * k * z,
            NonlinearitySpec::PureDamping => -z,
        }
    }

    /// The primitive `G(r, z) = ∫_0^z g(r, t) dt` in closed form.
    pub fn big_g(&self, r: f64, z: f64) -> f64 {
        match self {
            NonlinearitySpec::Saturable { lambda, s } => {
                let sv = s.eval(r);
                -0.5 * lambda.eval(r) * z * z + 0.5 * (1.0 + z * z / sv).ln()
            }
            NonlinearitySpec::DefocusingPower { k, q, p }
            | NonlinearitySpec::FocusingPower { k, q, p } => {
                let kk = k.eval(r);
                0.5 * kk * kk * z * z + q.eval(r) / p * z.abs().powf(*p)
            }
            NonlinearitySpec::ConcaveConvex { lambda, mu, q, p } => {
                lambda / q * z.abs().powf(*q) + mu / p * z.abs().powf(*p)
            }
            NonlinearitySpec::LinearHelmholtz { k } => 0.5 * k * k * z * z,
            NonlinearitySpec::PureDamping => -0.5 * z * z,
        }
    }

    /// `∂g/∂z (r, z)`. For the concave-convex family this diverges at
    /// `z = 0` and the returned value is `+∞` there.
    pub fn dg_dz(&self, r: f64, z: f64) -> f64 {
        match self {
            NonlinearitySpec::Saturable { lambda, s } => {
                let sv = s.eval(r);
                let d = sv + z * z;
                -lambda.eval(r) + (sv - z * z) / (d * d)
            }
            NonlinearitySpec::DefocusingPower { k, q, p }
            | NonlinearitySpec::FocusingPower { k, q, p } => {
                let kk = k.eval(r);
                kk * kk + (p - 1.0) * q.eval(r) * z.abs().powf(p - 2.0)
            }
            NonlinearitySpec::ConcaveConvex { lambda, mu, q, p } => {
                if z == 0.0 {
                    return f64::INFINITY;
                }
                lambda * (q - 1.0) * z.abs().powf(q - 2.0)
                    + mu * (p - 1.0) * z.abs().powf(p - 2.0)
            }
            NonlinearitySpec::LinearHelmholtz { k } => k * k,
            NonlinearitySpec::PureDamping => -1.0,
        }
    }

    /// Slope of `g(r, .)` at the origin, `g'(r, 0)`.
    pub fn slope_at_zero(&self, r: f64) -> f64 {
        self.dg_dz(r, 0.0)
    }

    pub fn is_autonomous(&self) -> bool {
        match self {
            NonlinearitySpec::Saturable { lambda, s } => lambda.is_constant() && s.is_constant(),
            NonlinearitySpec::DefocusingPower { k, q, .. }
            | NonlinearitySpec::FocusingPower { k, q, .. } => k.is_constant() && q.is_constant(),
            NonlinearitySpec::ConcaveConvex { .. }
            | NonlinearitySpec::LinearHelmholtz { .. }
            | NonlinearitySpec::PureDamping => true,
        }
    }

    /// The spec with every coefficient replaced by its limit at infinity,
    /// i.e. the autonomous problem the equation approaches as `r -> ∞`.
    pub fn limit_spec(&self) -> NonlinearitySpec {
        let freeze = |c: &CoefficientFn| CoefficientFn::constant(c.limit());
        match self {
            NonlinearitySpec::Saturable { lambda, s } => NonlinearitySpec::Saturable {
                lambda: freeze(lambda),
                s: freeze(s),
            },
            NonlinearitySpec::DefocusingPower { k, q, p } => NonlinearitySpec::DefocusingPower {
                k: freeze(k),
                q: freeze(q),
                p: *p,
            },
            NonlinearitySpec::FocusingPower { k, q, p } => NonlinearitySpec::FocusingPower {
                k: freeze(k),
                q: freeze(q),
                p: *p,
            },
            other => other.clone(),
        }
    }

    /// First positive zero of `z -> g(r, z)`, or `+∞` when `g(r, .)` stays
    /// positive on `(0, ∞)`. Closed form for every catalog family.
    pub fn alpha0(&self, r: f64) -> Result<f64> {
        match self {
            NonlinearitySpec::Saturable { lambda, s } => {
                let lam = lambda.eval(r);
                let sv = s.eval(r);
                let slope = 1.0 / sv - lam;
                if slope <= 0.0 {
                    return Err(Error::NoPositiveSlope { r, slope });
                }
                if lam <= 0.0 {
                    Ok(f64::INFINITY)
                } else {
                    Ok((1.0 / lam - sv).sqrt())
                }
            }
            NonlinearitySpec::DefocusingPower { k, q, p }
            | NonlinearitySpec::FocusingPower { k, q, p } => {
                let kk = k.eval(r);
                if kk * kk <= 0.0 {
                    return Err(Error::NoPositiveSlope { r, slope: 0.0 });
                }
                let qq = q.eval(r);
                if qq < 0.0 {
                    Ok((kk * kk / -qq).powf(1.0 / (p - 2.0)))
                } else {
                    Ok(f64::INFINITY)
                }
            }
            NonlinearitySpec::ConcaveConvex { lambda, mu, q, p } => {
                if *mu < 0.0 {
                    Ok((lambda / -mu).powf(1.0 / (p - q)))
                } else {
                    Ok(f64::INFINITY)
                }
            }
            NonlinearitySpec::LinearHelmholtz { .. } => Ok(f64::INFINITY),
            NonlinearitySpec::PureDamping => Err(Error::NoPositiveSlope { r, slope: -1.0 }),
        }
    }

    /// Bracketing + bisection fallback for the first positive zero of
    /// `g(r, .)`, refined to 1e-12 relative. Exists so the closed forms
    /// above can be cross-checked, and to terminate the decision for
    /// hypothetical families without one. Scans up to `cap` (default
    /// [`ALPHA0_SEARCH_CAP`]).
    pub fn alpha0_numeric(&self, r: f64, cap: f64) -> Result<f64> {
        let slope = self.slope_at_zero(r);
        if !(slope > 0.0) {
            return Err(Error::NoPositiveSlope { r, slope });
        }
        let lo0 = 1e-8;
        let n = 4096;
        let mut prev = lo0;
        let mut prev_sign = self.g(r, prev) > 0.0;
        for j in 1..=n {
            let z = lo0 * (cap / lo0).powf(j as f64 / n as f64);
            let pos = self.g(r, z) > 0.0;
            if prev_sign && !pos {
                // bisect on [prev, z]
                let (mut a, mut b) = (prev, z);
                while b - a > 1e-12 * b {
                    let mid = 0.5 * (a + b);
                    if self.g(r, mid) > 0.0 {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                return Ok(0.5 * (a + b));
            }
            prev = z;
            prev_sign = pos;
        }
        Err(Error::NoSignChange { cap })
    }

    /// The open interval of admissible shooting values around zero.
    ///
    /// Autonomous specs get `(-α₀, α₀)`. Nonautonomous specs get the set
    /// of α with `G(0, α) < sup_R G∞` (connected component of zero),
    /// which is all of R when the limiting primitive is unbounded.
    pub fn admissible_interval(&self) -> Result<(f64, f64)> {
        if self.is_autonomous() {
            let a0 = self.alpha0(0.0)?;
            return Ok((-a0, a0));
        }
        self.check_coefficient_hypotheses()?;
        let limit = self.limit_spec();
        let sup_g_inf = match limit.alpha0(0.0)? {
            a0 if a0.is_finite() => limit.big_g(0.0, a0),
            _ => return Ok((f64::NEG_INFINITY, f64::INFINITY)),
        };
        let a = self.smallest_root_of_big_g_at_zero(sup_g_inf)?;
        Ok((-a, a))
    }

    /// Smallest positive `a` with `G(0, a) = target`, by bisection on the
    /// rising branch of `G(0, .)`.
    fn smallest_root_of_big_g_at_zero(&self, target: f64) -> Result<f64> {
        // The rising branch ends at the first zero of g(0, .) when that is
        // finite, otherwise G(0, .) increases to +inf and we expand.
        let mut hi = match self.alpha0(0.0)? {
            a0 if a0.is_finite() => a0,
            _ => {
                let mut b = 1.0;
                while self.big_g(0.0, b) < target {
                    b *= 2.0;
                    if b > 1e9 {
                        return Err(Error::NoConvergence(
                            "admissible interval endpoint search exceeded 1e9".into(),
                        ));
                    }
                }
                b
            }
        };
        if self.big_g(0.0, hi) < target {
            // Cannot happen for monotone coefficient hypotheses; guard anyway.
            return Ok(hi);
        }
        let mut lo = 0.0;
        while hi - lo > 1e-13 * hi.max(1.0) {
            let mid = 0.5 * (lo + hi);
            if self.big_g(0.0, mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Coefficient direction and limit requirements for the nonautonomous
    /// families: nonincreasing `k`, `Q` with `k∞ > 0` for the power case,
    /// nondecreasing `λ`, `s` with `s > 0`, `λ∞ < 1/s∞` for the saturable
    /// case.
    fn check_coefficient_hypotheses(&self) -> Result<()> {
        match self {
            NonlinearitySpec::Saturable { lambda, s } => {
                if !lambda.is_nondecreasing() || !s.is_nondecreasing() {
                    return Err(Error::HypothesesFail(
                        "saturable coefficients must be nondecreasing".into(),
                    ));
                }
                if lambda.limit() >= 1.0 / s.limit() {
                    return Err(Error::HypothesesFail(
                        "limit slope 1/s_inf - lambda_inf must be positive".into(),
                    ));
                }
                Ok(())
            }
            NonlinearitySpec::DefocusingPower { k, q, .. }
            | NonlinearitySpec::FocusingPower { k, q, .. } => {
                if !k.is_nonincreasing() || !q.is_nonincreasing() {
                    return Err(Error::HypothesesFail(
                        "power-family coefficients must be nonincreasing".into(),
                    ));
                }
                if k.limit() <= 0.0 {
                    return Err(Error::HypothesesFail("k_inf must be positive".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Names and references of the spec's coefficient functions together
    /// with the direction the radial theory requires of each.
    pub(crate) fn coefficients(&self) -> Vec<(&'static str, &CoefficientFn, Monotonicity)> {
        match self {
            NonlinearitySpec::Saturable { lambda, s } => vec![
                ("lambda", lambda, Monotonicity::Nondecreasing),
                ("s", s, Monotonicity::Nondecreasing),
            ],
            NonlinearitySpec::DefocusingPower { k, q, .. }
            | NonlinearitySpec::FocusingPower { k, q, .. } => vec![
                ("k", k, Monotonicity::Nonincreasing),
                ("q", q, Monotonicity::Nonincreasing),
            ],
            _ => Vec::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g1() -> NonlinearitySpec {
        NonlinearitySpec::saturable(0.25, 2.0)
    }
    fn g2() -> NonlinearitySpec {
        NonlinearitySpec::defocusing_power(1.0, 4.0)
    }
    fn g3() -> NonlinearitySpec {
        NonlinearitySpec::focusing_power(1.0, 4.0)
    }

    #[test]
    fn eval_g_matches_hand_arithmetic() {
        // oddness at 0
        assert_eq!(g1().g(0.0, 0.0), 0.0);
        // the defocusing root: 1 - 1 = 0
        assert_eq!(g2().g(0.0, 1.0), 0.0);
        // -1/4 + 1/3 = 1/12
        let v = g1().g(0.0, 1.0);
        assert!((v - 1.0 / 12.0).abs() < 1e-15, "{v}");
    }

    #[test]
    fn big_g_values() {
        assert_eq!(g1().big_g(0.0, 0.0), 0.0);
        assert_eq!(g3().big_g(7.3, 0.0), 0.0);
        // G(1) for g2: 1/2 - 1/4 = 1/4
        assert!((g2().big_g(0.0, 1.0) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn alpha0_closed_forms() {
        assert!((g2().alpha0(0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((g1().alpha0(0.0).unwrap() - 2.0f64.sqrt()).abs() < 1e-15);
        assert_eq!(g3().alpha0(0.0).unwrap(), f64::INFINITY);
        assert_eq!(
            NonlinearitySpec::linear(2.0).alpha0(0.0).unwrap(),
            f64::INFINITY
        );
        assert!(matches!(
            NonlinearitySpec::PureDamping.alpha0(0.0),
            Err(Error::NoPositiveSlope { .. })
        ));
    }

    #[test]
    fn alpha0_numeric_agrees_with_closed_forms() {
        for spec in [g1(), g2()] {
            let closed = spec.alpha0(0.0).unwrap();
            let numeric = spec.alpha0_numeric(0.0, ALPHA0_SEARCH_CAP).unwrap();
            assert!(
                (closed - numeric).abs() <= 1e-11 * closed,
                "closed {closed} vs numeric {numeric}"
            );
        }
        // g3 stays positive: the numeric path reports no sign change.
        assert!(matches!(
            g3().alpha0_numeric(0.0, ALPHA0_SEARCH_CAP),
            Err(Error::NoSignChange { .. })
        ));
    }

    #[test]
    fn root_property_sign_pattern() {
        for spec in [g1(), g2()] {
            let a0 = spec.alpha0(0.0).unwrap();
            assert!(spec.g(0.0, a0).abs() < 1e-10);
            for j in 1..=40 {
                let inside = a0 * j as f64 / 41.0;
                assert!(spec.g(0.0, inside) > 0.0, "g({inside}) should be positive");
                let outside = a0 * (1.0 + j as f64 / 41.0);
                assert!(spec.g(0.0, outside) < 0.0, "g({outside}) should be negative");
            }
        }
    }

    #[test]
    fn concave_convex_origin_and_root() {
        let g4 = NonlinearitySpec::ConcaveConvex { lambda: 1.0, mu: -1.0, q: 1.5, p: 3.0 };
        g4.validate_params().unwrap();
        assert_eq!(g4.g(0.0, 0.0), 0.0);
        assert_eq!(g4.big_g(0.0, 0.0), 0.0);
        assert_eq!(g4.slope_at_zero(0.0), f64::INFINITY);
        // root of z^{0.5} = z^{2} at z = 1 (lambda = -mu = 1, p - q = 1.5)
        assert!((g4.alpha0(0.0).unwrap() - 1.0).abs() < 1e-14);
        let numeric = g4.alpha0_numeric(0.0, ALPHA0_SEARCH_CAP).unwrap();
        assert!((numeric - 1.0).abs() < 1e-11);
    }

    #[test]
    fn admissible_interval_autonomous() {
        let (lo, hi) = g2().admissible_interval().unwrap();
        assert!((hi - 1.0).abs() < 1e-12 && (lo + 1.0).abs() < 1e-12);
        let (lo, hi) = g1().admissible_interval().unwrap();
        assert!((hi - 2.0f64.sqrt()).abs() < 1e-12 && (lo + 2.0f64.sqrt()).abs() < 1e-12);
        let (lo, hi) = g3().admissible_interval().unwrap();
        assert!(lo == f64::NEG_INFINITY && hi == f64::INFINITY);
    }

    #[test]
    fn admissible_interval_nonautonomous_power() {
        // k(r) = 1 + e^{-r}, Q(r) = -1 + e^{-r}: both nonincreasing,
        // k_inf = 1, Q_inf = -1, so sup G_inf = 1/4 and the endpoint
        // solves 2 a^2 = 1/4 (G(0, a) = (k(0)^2/2) a^2, Q(0) = 0).
        let spec = NonlinearitySpec::DefocusingPower {
            k: CoefficientFn::ExpApproach { c_inf: 1.0, a: 1.0, b_or_gamma: 1.0 },
            q: CoefficientFn::ExpApproach { c_inf: -1.0, a: 1.0, b_or_gamma: 1.0 },
            p: 4.0,
        };
        let (lo, hi) = spec.admissible_interval().unwrap();
        let expect = (0.125f64).sqrt();
        assert!((hi - expect).abs() < 1e-10, "hi = {hi}, expect {expect}");
        assert!((lo + expect).abs() < 1e-10);

        // Q_inf >= 0 gives the whole line.
        let spec = NonlinearitySpec::FocusingPower {
            k: CoefficientFn::ExpApproach { c_inf: 1.0, a: 1.0, b_or_gamma: 1.0 },
            q: CoefficientFn::ExpApproach { c_inf: 0.5, a: 0.5, b_or_gamma: 2.0 },
            p: 4.0,
        };
        let (lo, hi) = spec.admissible_interval().unwrap();
        assert!(lo == f64::NEG_INFINITY && hi == f64::INFINITY);
    }

    #[test]
    fn admissible_interval_nonautonomous_saturable() {
        // lambda(r) = -e^{-r} is nondecreasing with limit 0: whole line.
        let spec = NonlinearitySpec::Saturable {
            lambda: CoefficientFn::ExpApproach { c_inf: 0.0, a: -1.0, b_or_gamma: 1.0 },
            s: CoefficientFn::constant(1.0),
        };
        let (lo, hi) = spec.admissible_interval().unwrap();
        assert!(lo == f64::NEG_INFINITY && hi == f64::INFINITY);
    }

    #[test]
    fn interval_rejects_bad_coefficient_directions() {
        // increasing Q violates the nonincreasing requirement
        let spec = NonlinearitySpec::DefocusingPower {
            k: CoefficientFn::ExpApproach { c_inf: 1.0, a: 1.0, b_or_gamma: 1.0 },
            q: CoefficientFn::ExpApproach { c_inf: -1.0, a: -1.0, b_or_gamma: 1.0 },
            p: 4.0,
        };
        assert!(matches!(
            spec.admissible_interval(),
            Err(Error::HypothesesFail(_))
        ));
    }

    #[test]
    fn spec_json_round_trip() {
        let specs = vec![
            g1(),
            g2(),
            g3(),
            NonlinearitySpec::ConcaveConvex { lambda: 2.0, mu: -0.5, q: 1.5, p: 4.0 },
            NonlinearitySpec::linear(1.0),
            NonlinearitySpec::PureDamping,
            NonlinearitySpec::Saturable {
                lambda: CoefficientFn::ExpApproach { c_inf: 0.0, a: -1.0, b_or_gamma: 1.0 },
                s: CoefficientFn::RationalApproach { c_inf: 2.0, a: -1.0, b_or_gamma: 2.0 },
            },
        ];
        for spec in specs {
            let text = serde_json::to_string(&spec).unwrap();
            let back: NonlinearitySpec = serde_json::from_str(&text).unwrap();
            assert_eq!(spec, back, "round trip failed for {text}");
        }
    }
}
