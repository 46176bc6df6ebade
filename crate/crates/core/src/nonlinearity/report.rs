//! Numeric hypothesis checks over sampled grids.
//!
//! The checks mirror the structural assumptions the radial theory rests
//! on: oddness, positive slope at zero, a sign change of `g(r, .)` at
//! some `α₀ ∈ (0, ∞]`, coefficient monotonicity toward the limits, and
//! (nonautonomously) a two-sided quadratic growth window. Failures are
//! report entries, never errors: the report is also how counterexample
//! inputs explain themselves.

use serde::{Deserialize, Serialize};

use super::{Monotonicity, NonlinearitySpec};

/// r-samples: {0} plus 511 log-spaced points in [1e-3, 1e3].
fn r_grid() -> Vec<f64> {
    let mut g = Vec::with_capacity(512);
    g.push(0.0);
    for j in 0..511 {
        g.push(1e-3 * (1e6f64).powf(j as f64 / 510.0));
    }
    g
}

fn z_grid(z_max: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|j| z_max * j as f64 / n as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeCheck {
    pub pass: bool,
    /// min over sampled r of g'(r, 0); +inf for the concave-convex family.
    pub min_over_r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SignChange {
    /// Finite first positive zero of g(0, .), with the sampled sign
    /// pattern (positive below, negative above) verified.
    Alpha0 { value: f64, sign_pattern_ok: bool },
    /// g(0, .) positive on (0, ∞).
    Infinite,
    /// No admissible positivity region.
    Fails,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientCheck {
    pub name: String,
    pub required: Monotonicity,
    pub declared: Monotonicity,
    pub pass: bool,
}

/// Two-sided growth window `λ z² ≤ g∞(z) z ≤ g(r, z) z ≤ Λ z²` on
/// `[0, R] × [-α*, α*]`, reported for nonautonomous specs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthWindow {
    pub alpha_star: f64,
    pub lambda_low: f64,
    pub lambda_high: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub oddness: bool,
    pub positive_slope_at_zero: SlopeCheck,
    pub sign_change: SignChange,
    pub coefficient_monotonicity: Vec<CoefficientCheck>,
    pub growth_window: Option<GrowthWindow>,
    pub notes: Vec<String>,
}

impl HypothesisReport {
    pub fn all_pass(&self) -> bool {
        self.oddness
            && self.positive_slope_at_zero.pass
            && match &self.sign_change {
                SignChange::Alpha0 { sign_pattern_ok, .. } => *sign_pattern_ok,
                SignChange::Infinite => true,
                SignChange::Fails => false,
            }
            && self.coefficient_monotonicity.iter().all(|c| c.pass)
            && self.growth_window.as_ref().map_or(true, |w| w.pass)
    }
}

impl NonlinearitySpec {
    /// Run every numeric hypothesis check on sampled grids.
    pub fn validate(&self) -> HypothesisReport {
        let mut notes = Vec::new();
        let rs = r_grid();

        // The z-window: twice the finite alpha0 when there is one.
        let z_max = match self.alpha0(0.0) {
            Ok(a0) if a0.is_finite() => 2.0 * a0,
            _ => 10.0,
        };
        let zs = z_grid(z_max, 512);

        // Oddness is exact for the closed forms; require bit equality.
        let mut oddness = true;
        'odd: for &r in &rs {
            for &z in &zs {
                if self.g(r, -z) != -self.g(r, z) {
                    oddness = false;
                    break 'odd;
                }
            }
        }

        // Slope at zero across r.
        let mut min_slope = f64::INFINITY;
        for &r in &rs {
            min_slope = min_slope.min(self.slope_at_zero(r));
        }
        let slope_check = SlopeCheck { pass: min_slope > 0.0, min_over_r: min_slope };
        if !slope_check.pass {
            if matches!(self, NonlinearitySpec::PureDamping) {
                notes.push(
                    "non-existence regime: g(z) z < 0 for every z != 0, so no nontrivial \
                     oscillating or localized solution exists; only u = 0 solves the problem"
                        .into(),
                );
            } else {
                notes.push(format!(
                    "g'(r, 0) = {min_slope} is not positive: the oscillation mechanism \
                     at small amplitudes is absent"
                ));
            }
        }

        // Sign change of g(0, .).
        let sign_change = match self.alpha0(0.0) {
            Ok(a0) if a0.is_finite() => {
                let mut ok = self.g(0.0, a0).abs() <= 1e-10 * (1.0 + a0);
                for j in 1..=64 {
                    let inside = a0 * j as f64 / 65.0;
                    let outside = a0 * (1.0 + j as f64 / 65.0);
                    ok &= self.g(0.0, inside) > 0.0 && self.g(0.0, outside) < 0.0;
                }
                SignChange::Alpha0 { value: a0, sign_pattern_ok: ok }
            }
            Ok(_) => {
                let mut positive = true;
                for j in 1..=64 {
                    positive &= self.g(0.0, z_max * j as f64 / 64.0 * 1e3) > 0.0;
                }
                if !positive {
                    notes.push("g(0, .) claimed positive but a sampled value was not".into());
                }
                SignChange::Infinite
            }
            Err(_) => SignChange::Fails,
        };

        // Coefficient monotonicity: declared direction vs the direction the
        // nonautonomous theory needs, cross-checked against the sampled
        // derivative sign.
        let coefficient_monotonicity = self
            .coefficients()
            .into_iter()
            .map(|(name, c, required)| {
                let declared = c.monotonicity();
                let direction_ok = match required {
                    Monotonicity::Nonincreasing => c.is_nonincreasing(),
                    Monotonicity::Nondecreasing => c.is_nondecreasing(),
                    Monotonicity::Constant => c.is_constant(),
                };
                let mut deriv_ok = true;
                for &r in &rs {
                    let d = c.deriv(r);
                    match declared {
                        Monotonicity::Constant => deriv_ok &= d == 0.0,
                        Monotonicity::Nonincreasing => deriv_ok &= d <= 0.0,
                        Monotonicity::Nondecreasing => deriv_ok &= d >= 0.0,
                    }
                }
                // the limit must be approached at the declared rate
                let r_far = 50.0;
                let a_mag = (c.eval(0.0) - c.limit()).abs();
                let limit_ok =
                    (c.eval(r_far) - c.limit()).abs() <= a_mag * c.decay(r_far) * (1.0 + 1e-12) + 1e-300;
                CoefficientCheck {
                    name: name.to_string(),
                    required,
                    declared,
                    pass: direction_ok && deriv_ok && limit_ok,
                }
            })
            .collect::<Vec<_>>();

        // Growth window for nonautonomous specs.
        let growth_window = if self.is_autonomous() {
            None
        } else {
            Some(self.growth_window_check(&rs, &mut notes))
        };

        // Primitive consistency spot check (trapezoid, coarse): the closed
        // forms should integrate g to machine-level agreement.
        let mut worst = 0.0f64;
        let z_chk = z_max.min(3.0);
        let n = 20_000;
        let mut acc = 0.0;
        let h = z_chk / n as f64;
        for j in 0..n {
            let a = j as f64 * h;
            let b = a + h;
            acc += 0.5 * h * (self.g(0.0, a) + self.g(0.0, b));
            if (j + 1) % 1000 == 0 {
                let dev = (acc - self.big_g(0.0, b)).abs() / (1.0 + b.abs());
                worst = worst.max(dev);
            }
        }
        notes.push(format!(
            "primitive consistency (trapezoid, h = {h:.2e}): max deviation {worst:.2e}"
        ));

        // Smallness of 2G - zg near z = 0 for large r, the nonautonomous
        // decay hypothesis; on the catalog it is O(|z|^p) or better.
        if !self.is_autonomous() {
            let mut sup = 0.0f64;
            for j in 0..64 {
                let z = 1e-8 * (1e7f64).powf(j as f64 / 63.0); // up to 0.1
                for &r in &[10.0, 100.0, 1000.0] {
                    let num = (2.0 * self.big_g(r, z) - z * self.g(r, z)).abs();
                    let den = z * z * z.ln().abs().powi(-2);
                    sup = sup.max(num / den);
                }
            }
            notes.push(format!(
                "asymptotic smallness |2G - zg| / (z^2 |ln z|^-2) <= {sup:.3e} on the sampled grid"
            ));
        }

        HypothesisReport {
            oddness,
            positive_slope_at_zero: slope_check,
            sign_change,
            coefficient_monotonicity,
            growth_window,
            notes,
        }
    }

    fn growth_window_check(&self, rs: &[f64], notes: &mut Vec<String>) -> GrowthWindow {
        let limit = self.limit_spec();
        // alpha* from the midpoint of the admissible interval when finite,
        // otherwise a unit window.
        let alpha_star = match self.admissible_interval() {
            Ok((_, hi)) if hi.is_finite() => {
                // G_inf(alpha*) = G(0, hi/2) on the rising branch of G_inf
                let target = self.big_g(0.0, 0.5 * hi);
                let cap = match limit.alpha0(0.0) {
                    Ok(a0) if a0.is_finite() => a0,
                    _ => 1e6,
                };
                let (mut lo, mut b) = (0.0, cap);
                while b - lo > 1e-12 * b.max(1.0) {
                    let mid = 0.5 * (lo + b);
                    if limit.big_g(0.0, mid) < target {
                        lo = mid;
                    } else {
                        b = mid;
                    }
                }
                0.5 * (lo + b)
            }
            Ok(_) => 1.0,
            Err(e) => {
                notes.push(format!("growth window unavailable: {e}"));
                return GrowthWindow {
                    alpha_star: f64::NAN,
                    lambda_low: f64::NAN,
                    lambda_high: f64::NAN,
                    pass: false,
                };
            }
        };
        let zs = z_grid(alpha_star, 256);
        let mut lambda_low = f64::INFINITY;
        let mut lambda_high = f64::NEG_INFINITY;
        let mut middle_ok = true;
        for &z in &zs {
            let ratio_inf = limit.g(0.0, z) / z;
            lambda_low = lambda_low.min(ratio_inf);
            for &r in rs {
                let ratio = self.g(r, z) / z;
                lambda_high = lambda_high.max(ratio);
                middle_ok &= ratio_inf <= ratio * (1.0 + 1e-12) + 1e-15;
            }
        }
        GrowthWindow {
            alpha_star,
            lambda_low,
            lambda_high,
            pass: lambda_low > 0.0 && middle_ok,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::CoefficientFn;

    #[test]
    fn autonomous_g2_passes_everything() {
        let report = NonlinearitySpec::defocusing_power(1.0, 4.0).validate();
        assert!(report.all_pass(), "{report:?}");
        match report.sign_change {
            SignChange::Alpha0 { value, sign_pattern_ok } => {
                assert!((value - 1.0).abs() < 1e-14);
                assert!(sign_pattern_ok);
            }
            _ => panic!("expected finite alpha0"),
        }
        assert!(report.growth_window.is_none());
    }

    #[test]
    fn pure_damping_fails_with_explanatory_note() {
        let report = NonlinearitySpec::PureDamping.validate();
        assert!(!report.positive_slope_at_zero.pass);
        assert!(!report.all_pass());
        assert!(matches!(report.sign_change, SignChange::Fails));
        assert!(report.notes.iter().any(|n| n.contains("non-existence regime")));
    }

    #[test]
    fn increasing_q_fails_coefficient_check() {
        let spec = NonlinearitySpec::DefocusingPower {
            k: CoefficientFn::ExpApproach { c_inf: 1.0, a: 1.0, b_or_gamma: 1.0 },
            q: CoefficientFn::ExpApproach { c_inf: -1.0, a: -1.0, b_or_gamma: 1.0 },
            p: 4.0,
        };
        let report = spec.validate();
        let q_entry = report
            .coefficient_monotonicity
            .iter()
            .find(|c| c.name == "q")
            .unwrap();
        assert!(!q_entry.pass);
        let k_entry = report
            .coefficient_monotonicity
            .iter()
            .find(|c| c.name == "k")
            .unwrap();
        assert!(k_entry.pass);
        assert!(!report.all_pass());
    }

    #[test]
    fn nonautonomous_power_growth_window() {
        let spec = NonlinearitySpec::DefocusingPower {
            k: CoefficientFn::ExpApproach { c_inf: 1.0, a: 1.0, b_or_gamma: 1.0 },
            q: CoefficientFn::ExpApproach { c_inf: -1.0, a: 1.0, b_or_gamma: 1.0 },
            p: 4.0,
        };
        let report = spec.validate();
        assert!(report.all_pass(), "{report:#?}");
        let w = report.growth_window.unwrap();
        assert!(w.pass);
        assert!(w.lambda_low > 0.0);
        assert!(w.lambda_high >= w.lambda_low);
        // g_inf(z)/z = 1 - z^2 at the window edge
        assert!((w.lambda_low - (1.0 - w.alpha_star * w.alpha_star)).abs() < 1e-6);
    }

    #[test]
    fn report_serializes() {
        let report = NonlinearitySpec::saturable(0.25, 2.0).validate();
        let text = serde_json::to_string(&report).unwrap();
        let back: HypothesisReport = serde_json::from_str(&text).unwrap();
        assert_eq!(report, back);
    }
}
