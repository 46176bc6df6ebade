//! Reference routines for the test suites.
//!
//! Everything in this crate is written from classical formulas and kept
//! independent of the solver crates, so tests can compare two codepaths
//! that share nothing. Accuracy targets are ~1e-12, far beyond what the
//! tests assert.

/// Bessel function of the first kind, order zero.
///
/// Power series (Kahan-summed) for |x| <= 12, Hankel asymptotic
/// expansion with adaptive truncation beyond.
pub fn bessel_j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= 12.0 {
        // J0(x) = sum_m (-1)^m (x^2/4)^m / (m!)^2
        let q = 0.25 * ax * ax;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut comp = 0.0;
        for m in 1..400 {
            term *= -q / ((m * m) as f64);
            let y = term - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
            if term.abs() < 1e-20 {
                break;
            }
        }
        sum
    } else {
        // J0(x) = sqrt(2/(pi x)) [P cos(x - pi/4) - Q sin(x - pi/4)].
        // P collects the even Hankel terms A_k z^k (z = 1/(8x)) with signs
        // +,-,+,..., Q the odd ones with signs -,+,-,...; the coefficients
        // follow A_{k+1} = A_k (2k+1)^2 / (k+1), A_0 = 1. The series is
        // truncated at its smallest term.
        let z = 1.0 / (8.0 * ax);
        let mut p = 0.0;
        let mut q = 0.0;
        let mut term: f64 = 1.0; // A_k z^k
        let mut prev = f64::INFINITY;
        for k in 0u32..40 {
            if term.abs() > prev {
                break; // asymptotic series started diverging
            }
            prev = term.abs();
            let signed = if (k + 1) & 2 == 0 { term } else { -term };
            if k % 2 == 0 {
                p += signed;
            } else {
                q += signed;
            }
            if term.abs() < 1e-19 {
                break;
            }
            let kk = k as f64;
            term *= (2.0 * kk + 1.0) * (2.0 * kk + 1.0) / (kk + 1.0) * z;
        }
        let chi = ax - std::f64::consts::FRAC_PI_4;
        (2.0 / (std::f64::consts::PI * ax)).sqrt() * (p * chi.cos() - q * chi.sin())
    }
}

/// First positive zero of J0, bracketed and bisected on `bessel_j0`.
pub fn bessel_j0_first_zero() -> f64 {
    bisect(bessel_j0, 2.0, 3.0, 1e-14)
}

/// Plain bisection; `f(a)` and `f(b)` must have opposite signs.
pub fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, xtol: f64) -> f64 {
    let fa = f(a);
    assert!(fa * f(b) < 0.0, "bisect: endpoints do not bracket a root");
    while (b - a).abs() > xtol {
        let mid = 0.5 * (a + b);
        if mid == a || mid == b {
            break;
        }
        if f(mid) * fa > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// Adaptive Simpson quadrature of `f` over [a, b].
pub fn quad(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, 60)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Period of the one-dimensional oscillation -u'' = g(u), u(0) = alpha,
/// u'(0) = 0, computed from the first integral:
///
///   T(alpha) = 4 * int_0^alpha dz / sqrt(2 (G(alpha) - G(z))).
///
/// The substitution z = alpha sin(theta) removes the endpoint singularity.
pub fn period_integral(big_g: impl Fn(f64) -> f64, alpha: f64) -> f64 {
    let ga = big_g(alpha);
    let integrand = |theta: f64| {
        let s = theta.sin();
        let denom2 = 2.0 * (ga - big_g(alpha * s));
        if denom2 <= 0.0 {
            // Only reachable at theta = pi/2 through rounding; the limit
            // value is sqrt(alpha / g(alpha)), but the quadrature never
            // lands exactly there with the open-ish Simpson nodes we use.
            return 0.0;
        }
        alpha * theta.cos() / denom2.sqrt()
    };
    4.0 * quad(&integrand, 0.0, std::f64::consts::FRAC_PI_2, 1e-13)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values from standard tables of J0.
    #[test]
    fn j0_matches_tabulated_values() {
        let cases = [
            (1.0, 0.765197686557966551),
            (5.0, -0.177596771314338304),
            (12.0, 0.047689310796833537),
            (30.0, -0.086367983581040211),
            (50.0, 0.055812327669251815),
        ];
        for (x, want) in cases {
            assert!(
                (bessel_j0(x) - want).abs() < 1e-13,
                "J0({x}) = {} but expected {want}",
                bessel_j0(x)
            );
        }
    }

    #[test]
    fn j0_series_asymptotic_agree_at_seam() {
        for i in 0..21 {
            let x = 11.5 + 0.05 * i as f64;
            let q = 0.25 * x * x;
            let mut term = 1.0;
            let mut series = 1.0;
            let mut comp = 0.0;
            for m in 1..400 {
                term *= -q / ((m * m) as f64);
                let y = term - comp;
                let t = series + y;
                comp = (t - series) - y;
                series = t;
            }
            assert!(
                (bessel_j0(x) - series).abs() < 5e-13,
                "seam mismatch at x={x}: {} vs {series}",
                bessel_j0(x)
            );
        }
    }

    #[test]
    fn first_j0_zero() {
        let z = bessel_j0_first_zero();
        assert!((z - 2.404825557695773).abs() < 1e-12, "j0_1 = {z}");
    }

    #[test]
    fn quad_polynomial_exact() {
        let v = quad(&|x| x * x * x - 2.0 * x + 1.0, -1.0, 3.0, 1e-12);
        // int = [x^4/4 - x^2 + x] over [-1,3] = (81/4 - 9 + 3) - (1/4 - 1 - 1)
        assert!((v - 16.0).abs() < 1e-10);
    }

    #[test]
    fn period_of_harmonic_oscillator_is_2pi() {
        // g(z) = z, G(z) = z^2/2: period 2*pi independent of amplitude.
        for alpha in [0.1, 0.5, 1.3] {
            let t = period_integral(|z| 0.5 * z * z, alpha);
            assert!(
                (t - 2.0 * std::f64::consts::PI).abs() < 1e-9,
                "T({alpha}) = {t}"
            );
        }
    }
}
