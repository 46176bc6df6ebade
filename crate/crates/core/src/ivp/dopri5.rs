//! Dormand-Prince 5(4) embedded pair for two-component systems, with the
//! standard quartic dense-output interpolant. FSAL: the accepted step's
//! last stage is the next step's first.

// Runge-Kutta matrix
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
// 5th-order weights (also row 7 of A)
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// abscissae
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
// difference of the 5th- and 4th-order weights, for the error estimate
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// dense-output weights
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

pub struct StepOutput {
    pub y_new: [f64; 2],
    pub f_new: [f64; 2],
    pub err: f64,
    pub cont: [[f64; 5]; 2],
}

/// One trial step of size `h` from `(r, y)` with `f = rhs(r, y)` known.
/// Errors when any stage produces a non-finite value.
pub fn step(
    rhs: &impl Fn(f64, &[f64; 2]) -> [f64; 2],
    r: f64,
    y: &[f64; 2],
    f: &[f64; 2],
    h: f64,
    rtol: f64,
    atol: f64,
) -> Result<StepOutput, ()> {
    let k1 = *f;
    let mut yt = [0.0; 2];

    for i in 0..2 {
        yt[i] = y[i] + h * A21 * k1[i];
    }
    let k2 = rhs(r + C2 * h, &yt);
    for i in 0..2 {
        yt[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
    }
    let k3 = rhs(r + C3 * h, &yt);
    for i in 0..2 {
        yt[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
    }
    let k4 = rhs(r + C4 * h, &yt);
    for i in 0..2 {
        yt[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
    }
    let k5 = rhs(r + C5 * h, &yt);
    for i in 0..2 {
        yt[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
    }
    let k6 = rhs(r + h, &yt);
    let mut y_new = [0.0; 2];
    for i in 0..2 {
        y_new[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
    }
    let k7 = rhs(r + h, &y_new);

    let mut err_sq = 0.0;
    for i in 0..2 {
        let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let sc = atol + rtol * y[i].abs().max(y_new[i].abs());
        err_sq += (e / sc) * (e / sc);
    }
    let err = (0.5 * err_sq).sqrt();
    if !err.is_finite() || !y_new.iter().all(|v| v.is_finite()) {
        return Err(());
    }

    let mut cont = [[0.0; 5]; 2];
    for i in 0..2 {
        let ydiff = y_new[i] - y[i];
        let bspl = h * k1[i] - ydiff;
        cont[i][0] = y[i];
        cont[i][1] = ydiff;
        cont[i][2] = bspl;
        cont[i][3] = ydiff - h * k7[i] - bspl;
        cont[i][4] = h
            * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
    }

    Ok(StepOutput { y_new, f_new: k7, err, cont })
}

/// Starting step size estimate (the usual two-probe heuristic).
pub fn initial_step(
    rhs: &impl Fn(f64, &[f64; 2]) -> [f64; 2],
    r: f64,
    y: &[f64; 2],
    f: &[f64; 2],
    rtol: f64,
    atol: f64,
    r_max: f64,
) -> f64 {
    let sc = |i: usize, v: f64| atol + rtol * v.abs().max(y[i].abs());
    let d0 = ((0..2).map(|i| (y[i] / sc(i, y[i])).powi(2)).sum::<f64>() * 0.5).sqrt();
    let d1 = ((0..2).map(|i| (f[i] / sc(i, y[i])).powi(2)).sum::<f64>() * 0.5).sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(r_max - r);
    let y1 = [y[0] + h0 * f[0], y[1] + h0 * f[1]];
    let f1 = rhs(r + h0, &y1);
    let d2 = ((0..2)
        .map(|i| ((f1[i] - f[i]) / sc(i, y[i])).powi(2))
        .sum::<f64>()
        * 0.5)
        .sqrt()
        / h0;
    let dm = d1.max(d2);
    let h1 = if dm <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / dm).powf(0.2)
    };
    (100.0 * h0).min(h1).min(r_max - r)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Integrate u'' = -u (harmonic oscillator) with fixed steps and check
    /// the 5th-order convergence of the pair, which would expose any
    /// transcription error in the tableau.
    #[test]
    fn fifth_order_convergence_on_oscillator() {
        let rhs = |_r: f64, y: &[f64; 2]| [y[1], -y[0]];
        let run = |h: f64| -> f64 {
            let mut y = [1.0, 0.0];
            let mut r = 0.0;
            let mut f = rhs(r, &y);
            while r < 10.0 - 1e-12 {
                let out = step(&rhs, r, &y, &f, h, 1e-3, 1e-3).unwrap();
                y = out.y_new;
                f = out.f_new;
                r += h;
            }
            (y[0] - (10.0f64).cos()).abs()
        };
        let e1 = run(0.05);
        let e2 = run(0.025);
        let order = (e1 / e2).log2();
        assert!(
            (4.5..6.5).contains(&order),
            "observed order {order} (errors {e1:.3e}, {e2:.3e})"
        );
    }

    /// The dense output must interpolate both endpoints exactly and stay
    /// within O(h^5) of the true solution inside the step.
    #[test]
    fn dense_output_interpolates() {
        let rhs = |_r: f64, y: &[f64; 2]| [y[1], -y[0]];
        let y = [1.0, 0.0];
        let f = rhs(0.0, &y);
        let h = 0.1;
        let out = step(&rhs, 0.0, &y, &f, h, 1e-12, 1e-14).unwrap();
        let interp = |c: &[f64; 5], th: f64| {
            let omt = 1.0 - th;
            c[0] + th * (c[1] + omt * (c[2] + th * (c[3] + omt * c[4])))
        };
        assert!((interp(&out.cont[0], 0.0) - 1.0).abs() < 1e-16);
        assert!((interp(&out.cont[0], 1.0) - out.y_new[0]).abs() < 1e-16);
        for j in 1..10 {
            let th = j as f64 / 10.0;
            let r = th * h;
            assert!(
                (interp(&out.cont[0], th) - r.cos()).abs() < 1e-8,
                "dense u at theta={th}"
            );
            assert!(
                (interp(&out.cont[1], th) + r.sin()).abs() < 1e-8,
                "dense u' at theta={th}"
            );
        }
    }
}
