//! Adaptive integration of the singular radial initial value problem
//!
//! ```text
//! -u'' - (N-1)/r u' = g(r, u),   u(0) = α,  u'(0) = 0,
//! ```
//!
//! as the first-order system `(u, u')' = (u', -(N-1)/r u' - g(r, u))`.
//! The `r = 0` singularity is bypassed with a degree-2 Taylor handoff at
//! `r0` (from the limit identity `N u''(0) = -g(0, α)`); from there a
//! Dormand-Prince 5(4) pair with quartic dense output integrates to
//! `r_max` with mixed absolute/relative error control. Zeros of `u` and
//! of `u'` are located by sign changes on dense output and refined by
//! bracketing, never by re-integration.

mod dopri5;

use serde::{Deserialize, Serialize};

use crate::nonlinearity::NonlinearitySpec;
use crate::{Error, Result};

/// Shooting problem setup: dimension, center value, and solver knobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveConfig {
    /// Space dimension N >= 1.
    pub n: u32,
    /// Center value u(0).
    pub alpha: f64,
    /// Integration stops here (barring blow-up).
    pub r_max: f64,
    pub rtol: f64,
    pub atol: f64,
    /// Taylor handoff radius.
    pub r0: f64,
    /// Blow-up when |u| exceeds this multiple of max(alpha0, |alpha|)
    /// while still moving away from zero.
    pub blowup_factor: f64,
    pub max_steps: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            n: 3,
            alpha: 0.5,
            r_max: 200.0,
            rtol: 1e-10,
            atol: 1e-12,
            r0: 1e-4,
            blowup_factor: 2.0,
            max_steps: 1_000_000,
        }
    }
}

impl SolveConfig {
    pub fn new(n: u32, alpha: f64) -> Self {
        SolveConfig { n, alpha, ..Default::default() }
    }

    pub fn with_r_max(mut self, r_max: f64) -> Self {
        self.r_max = r_max;
        self
    }

    pub fn with_tolerances(mut self, rtol: f64, atol: f64) -> Self {
        self.rtol = rtol;
        self.atol = atol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::InvalidConfig("dimension must be >= 1".into()));
        }
        if !self.alpha.is_finite() {
            return Err(Error::InvalidConfig("alpha must be finite".into()));
        }
        if !(self.r0 > 0.0 && self.r0 < 1.0) {
            return Err(Error::InvalidConfig(format!("r0 must lie in (0, 1), got {}", self.r0)));
        }
        if self.r_max <= self.r0 {
            return Err(Error::InvalidConfig("r_max must exceed r0".into()));
        }
        if !(self.rtol >= 1e-13) {
            return Err(Error::InvalidConfig(format!("rtol must be >= 1e-13, got {}", self.rtol)));
        }
        if !(self.atol > 0.0) {
            return Err(Error::InvalidConfig("atol must be positive".into()));
        }
        if self.blowup_factor <= 1.0 {
            return Err(Error::InvalidConfig("blowup_factor must exceed 1".into()));
        }
        Ok(())
    }
}

/// Why the integration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    ReachedRmax,
    Blowup,
    StepFailure,
}

/// One accepted node `(r, u, u')`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub r: f64,
    pub u: f64,
    pub du: f64,
}

/// Per-step dense-output coefficients (quartic in the step fraction).
#[derive(Debug, Clone, Copy)]
struct DenseSeg {
    r: f64,
    h: f64,
    cont: [[f64; 5]; 2],
}

/// The integration record: accepted nodes, dense output, refined events.
#[derive(Debug, Clone)]
pub struct Trajectory {
    nodes: Vec<Node>,
    dense: Vec<DenseSeg>,
    /// Refined radii with u = 0, increasing.
    pub zeros: Vec<f64>,
    /// Refined critical points (r, u(r)) with u' = 0, increasing in r.
    pub criticals: Vec<(f64, f64)>,
    pub terminated_by: Termination,
}

impl Trajectory {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn first_r(&self) -> f64 {
        self.nodes.first().map_or(f64::NAN, |n| n.r)
    }

    pub fn last_r(&self) -> f64 {
        self.nodes.last().map_or(f64::NAN, |n| n.r)
    }

    pub fn first_zero(&self) -> Option<f64> {
        self.zeros.first().copied()
    }

    /// Max of |u| over the accepted nodes.
    pub fn sup_u(&self) -> f64 {
        self.nodes.iter().fold(0.0, |m, n| m.max(n.u.abs()))
    }

    /// Max of |u'| over the accepted nodes.
    pub fn sup_du(&self) -> f64 {
        self.nodes.iter().fold(0.0, |m, n| m.max(n.du.abs()))
    }

    /// Dense-output evaluation of `(u, u')` anywhere in the computed range.
    pub fn evaluate(&self, r: f64) -> Result<(f64, f64)> {
        let lo = self.first_r();
        let hi = self.last_r();
        if !(lo <= r && r <= hi) {
            return Err(Error::OutOfRange { r, lo, hi });
        }
        // Node radii are exact segment endpoints; return stored values.
        if let Ok(i) = self
            .nodes
            .binary_search_by(|n| n.r.partial_cmp(&r).unwrap())
        {
            let n = self.nodes[i];
            return Ok((n.u, n.du));
        }
        let seg_idx = match self
            .dense
            .binary_search_by(|s| s.r.partial_cmp(&r).unwrap())
        {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) => i - 1,
        };
        let seg = &self.dense[seg_idx];
        let theta = (r - seg.r) / seg.h;
        Ok((interp(&seg.cont[0], theta), interp(&seg.cont[1], theta)))
    }
}

fn interp(c: &[f64; 5], theta: f64) -> f64 {
    let omt = 1.0 - theta;
    c[0] + theta * (c[1] + omt * (c[2] + theta * (c[3] + omt * c[4])))
}

/// Degree-2 Taylor state at the handoff radius:
/// `u(r0) = α - g(0, α) r0² / (2N)`, `u'(r0) = -g(0, α) r0 / N`.
///
/// For N = 1 this is the regular expansion with `u''(0) = -g(α)`; the
/// same formula covers both cases.
pub fn taylor_start(spec: &NonlinearitySpec, cfg: &SolveConfig) -> (f64, f64) {
    let g0 = spec.g(0.0, cfg.alpha);
    let nf = f64::from(cfg.n);
    (
        cfg.alpha - g0 * cfg.r0 * cfg.r0 / (2.0 * nf),
        -g0 * cfg.r0 / nf,
    )
}

/// Integrate the radial problem from the Taylor handoff to `r_max`.
pub fn integrate(spec: &NonlinearitySpec, cfg: &SolveConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let nm1 = f64::from(cfg.n) - 1.0;
    let rhs = |r: f64, y: &[f64; 2]| -> [f64; 2] { [y[1], -nm1 / r * y[1] - spec.g(r, y[0])] };

    let (u0, du0) = taylor_start(spec, cfg);
    if !(u0.is_finite() && du0.is_finite()) {
        return Err(Error::InvalidSpec(format!(
            "g(0, {}) is not finite",
            cfg.alpha
        )));
    }

    // Blow-up amplitude: beyond every bounded regime the solution can reach.
    let alpha0_finite = match spec.alpha0(0.0) {
        Ok(a0) if a0.is_finite() => a0,
        _ => 0.0,
    };
    let blow_amp = cfg.blowup_factor * alpha0_finite.max(cfg.alpha.abs()).max(cfg.atol);

    let mut y = [u0, du0];
    let mut r = cfg.r0;
    let mut f = rhs(r, &y);
    if !(f[0].is_finite() && f[1].is_finite()) {
        return Err(Error::InvalidSpec(format!(
            "right-hand side not finite at the handoff state ({r}, {u0})"
        )));
    }

    let mut nodes = vec![Node { r, u: y[0], du: y[1] }];
    let mut dense: Vec<DenseSeg> = Vec::new();
    let mut zeros: Vec<f64> = Vec::new();
    let mut criticals: Vec<(f64, f64)> = Vec::new();
    let mut terminated_by = Termination::StepFailure;

    let mut h = dopri5::initial_step(&rhs, r, &y, &f, cfg.rtol, cfg.atol, cfg.r_max);
    let mut rejected = false;
    let mut steps = 0usize;

    while steps < cfg.max_steps {
        steps += 1;
        if r + h >= cfg.r_max {
            h = cfg.r_max - r;
        }
        if h <= 16.0 * f64::EPSILON * r {
            terminated_by = Termination::StepFailure;
            break;
        }
        let step = dopri5::step(&rhs, r, &y, &f, h, cfg.rtol, cfg.atol);
        match step {
            Err(_) => {
                // non-finite stage values: shrink hard
                h *= 0.25;
                rejected = true;
                continue;
            }
            Ok(out) => {
                if out.err > 1.0 {
                    let fac = (0.9 * out.err.powf(-0.2)).max(0.2);
                    h *= fac;
                    rejected = true;
                    continue;
                }
                // accepted
                let seg = DenseSeg { r, h, cont: out.cont };
                locate_events(&seg, &mut zeros, &mut criticals);
                r += h;
                y = out.y_new;
                f = out.f_new;
                dense.push(seg);
                nodes.push(Node { r, u: y[0], du: y[1] });

                if y[0].abs() > blow_amp && y[0] * y[1] > 0.0 {
                    terminated_by = Termination::Blowup;
                    break;
                }
                if r >= cfg.r_max {
                    terminated_by = Termination::ReachedRmax;
                    break;
                }
                let mut fac = 0.9 * out.err.max(1e-30).powf(-0.2);
                fac = fac.clamp(0.2, if rejected { 1.0 } else { 5.0 });
                h *= fac;
                rejected = false;
            }
        }
    }

    Ok(Trajectory { nodes, dense, zeros, criticals, terminated_by })
}

/// Scan a dense segment for sign changes of u and u' and refine each by
/// bracketed bisection with secant acceleration on the dense output.
fn locate_events(seg: &DenseSeg, zeros: &mut Vec<f64>, criticals: &mut Vec<(f64, f64)>) {
    const SUBS: usize = 8;
    for comp in 0..2 {
        let eval = |r: f64| interp(&seg.cont[comp], (r - seg.r) / seg.h);
        let mut prev_r = seg.r;
        let mut prev_v = eval(prev_r);
        for j in 1..=SUBS {
            let rj = if j == SUBS { seg.r + seg.h } else { seg.r + seg.h * j as f64 / SUBS as f64 };
            let vj = eval(rj);
            if prev_v * vj < 0.0 {
                let root = refine_root(&eval, prev_r, rj, prev_v, vj);
                if comp == 0 {
                    push_event(zeros, root, |z| *z);
                } else {
                    let u_here = interp(&seg.cont[0], (root - seg.r) / seg.h);
                    push_event(criticals, (root, u_here), |c| c.0);
                }
            }
            prev_r = rj;
            prev_v = vj;
        }
    }
}

fn push_event<T>(list: &mut Vec<T>, ev: T, key: impl Fn(&T) -> f64) {
    let r_new = key(&ev);
    if let Some(last) = list.last() {
        if (r_new - key(last)).abs() <= 1e-12 * (1.0 + r_new.abs()) {
            return; // duplicate across a step boundary
        }
    }
    list.push(ev);
}

/// Bisection with a secant trial per iteration; converges to ~machine
/// precision in r (far inside the 1e-12 relative requirement).
fn refine_root(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64) -> f64 {
    for _ in 0..120 {
        if (b - a).abs() <= 4.0 * f64::EPSILON * b.abs().max(1e-300) {
            break;
        }
        // secant trial, safeguarded to the bracket interior
        let mut m = if fb != fa { b - fb * (b - a) / (fb - fa) } else { 0.5 * (a + b) };
        let mid = 0.5 * (a + b);
        if !(m > a && m < b) {
            m = mid;
        }
        // alternate toward bisection if the secant point hugs an endpoint
        if (m - a).abs() < 0.01 * (b - a) || (b - m).abs() < 0.01 * (b - a) {
            m = mid;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fa * fm < 0.0 {
            b = m;
            fb = fm;
        } else {
            a = m;
            fa = fm;
        }
    }
    // linear interpolation for the last sliver
    if fb != fa {
        a - fa * (b - a) / (fb - fa)
    } else {
        0.5 * (a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(SolveConfig::default().validate().is_ok());
        assert!(SolveConfig { r0: 0.0, ..Default::default() }.validate().is_err());
        assert!(SolveConfig { r0: 1.5, ..Default::default() }.validate().is_err());
        assert!(SolveConfig { rtol: 1e-14, ..Default::default() }.validate().is_err());
        assert!(SolveConfig { r_max: 1e-5, ..Default::default() }.validate().is_err());
        assert!(SolveConfig { blowup_factor: 0.5, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn taylor_start_trivial_and_constant() {
        let spec = NonlinearitySpec::defocusing_power(1.0, 4.0);
        // alpha = 0: the zero trajectory
        let cfg = SolveConfig::new(3, 0.0);
        assert_eq!(taylor_start(&spec, &cfg), (0.0, 0.0));
        // alpha = alpha0 = 1: all corrections vanish
        let cfg = SolveConfig::new(3, 1.0);
        assert_eq!(taylor_start(&spec, &cfg), (1.0, 0.0));
    }

    #[test]
    fn taylor_start_matches_linear_solution() {
        // u(r) = sin(r)/r for g(z) = z, N = 3: compare at r0 = 1e-3
        let spec = NonlinearitySpec::linear(1.0);
        let cfg = SolveConfig { n: 3, alpha: 1.0, r0: 1e-3, ..Default::default() };
        let (u, du) = taylor_start(&spec, &cfg);
        let r0 = 1e-3f64;
        let exact_u = r0.sin() / r0;
        let exact_du = (r0 * r0.cos() - r0.sin()) / (r0 * r0);
        assert!((u - exact_u).abs() < r0.powi(4), "u: {u} vs {exact_u}");
        assert!((du - exact_du).abs() < r0.powi(3), "du: {du} vs {exact_du}");
        assert!((u - (1.0 - r0 * r0 / 6.0)).abs() < 1e-18);
        assert!((du + r0 / 3.0).abs() < 1e-18);
    }

    #[test]
    fn zero_solution_stays_zero() {
        let spec = NonlinearitySpec::defocusing_power(1.0, 4.0);
        let cfg = SolveConfig::new(3, 0.0).with_r_max(50.0);
        let traj = integrate(&spec, &cfg).unwrap();
        assert_eq!(traj.terminated_by, Termination::ReachedRmax);
        assert!(traj.nodes().iter().all(|n| n.u == 0.0 && n.du == 0.0));
        assert!(traj.zeros.is_empty());
        assert!(traj.criticals.is_empty());
    }

    #[test]
    fn constant_solution_at_alpha0_exact_for_g2() {
        let spec = NonlinearitySpec::defocusing_power(1.0, 4.0);
        let cfg = SolveConfig::new(3, 1.0).with_r_max(50.0);
        let traj = integrate(&spec, &cfg).unwrap();
        assert!(traj.nodes().iter().all(|n| n.u == 1.0 && n.du == 0.0));
        assert!(traj.zeros.is_empty());
    }

    #[test]
    fn blowup_above_alpha0() {
        let spec = NonlinearitySpec::defocusing_power(1.0, 4.0);
        let cfg = SolveConfig::new(3, 1.5).with_r_max(200.0);
        let traj = integrate(&spec, &cfg).unwrap();
        assert_eq!(traj.terminated_by, Termination::Blowup);
        // strictly increasing u along the computed range
        for w in traj.nodes().windows(2) {
            assert!(w[1].u > w[0].u);
        }
    }

    #[test]
    fn evaluate_reproduces_nodes_and_refined_zeros() {
        let spec = NonlinearitySpec::linear(1.0);
        let cfg = SolveConfig::new(3, 1.0).with_r_max(40.0);
        let traj = integrate(&spec, &cfg).unwrap();
        for n in traj.nodes().iter().step_by(7) {
            let (u, du) = traj.evaluate(n.r).unwrap();
            assert_eq!(u, n.u);
            assert_eq!(du, n.du);
        }
        for &z in &traj.zeros {
            let (u, _) = traj.evaluate(z).unwrap();
            assert!(u.abs() <= 1e-10 * (1.0 + 1.0), "|u({z})| = {}", u.abs());
        }
        assert!(traj.evaluate(1e-6).is_err());
        assert!(traj.evaluate(41.0).is_err());
    }

    #[test]
    fn antisymmetry_under_alpha_negation_is_bitwise() {
        let spec = NonlinearitySpec::saturable(0.25, 2.0);
        let plus = integrate(&spec, &SolveConfig::new(3, 0.7).with_r_max(30.0)).unwrap();
        let minus = integrate(&spec, &SolveConfig::new(3, -0.7).with_r_max(30.0)).unwrap();
        assert_eq!(plus.nodes().len(), minus.nodes().len());
        for (a, b) in plus.nodes().iter().zip(minus.nodes()) {
            assert_eq!(a.r, b.r);
            assert_eq!(a.u, -b.u);
            assert_eq!(a.du, -b.du);
        }
        assert_eq!(plus.zeros, minus.zeros);
    }
}
