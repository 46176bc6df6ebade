//! Monitor functions along a trajectory, solution classification, decay
//! fits, and period detection.
//!
//! Two scalar monitors carry the structure of the radial problem:
//!
//! * `Z(r) = u'² + 2 G(r, u)`, strictly nonincreasing for N >= 2 and
//!   conserved for N = 1;
//! * `ψ(r) = v'² + 2 r^{N-1} G(r, u)` with `v = r^{(N-1)/2} u`, whose
//!   two-sided boundedness away from zero encodes the exact envelope
//!   decay rate `r^{(1-N)/2}`.

use serde::{Deserialize, Serialize};

use crate::ivp::{SolveConfig, Termination, Trajectory};
use crate::nonlinearity::NonlinearitySpec;
use crate::{Error, Result};

/// Z and ψ sampled on the trajectory's accepted nodes.
#[derive(Debug, Clone)]
pub struct MonitorSeries {
    pub r: Vec<f64>,
    pub z: Vec<f64>,
    pub psi: Vec<f64>,
    pub v: Vec<f64>,
    pub dv: Vec<f64>,
}

pub fn compute_monitors(traj: &Trajectory, spec: &NonlinearitySpec, n: u32) -> MonitorSeries {
    let nf = f64::from(n);
    let half = 0.5 * (nf - 1.0);
    let mut out = MonitorSeries {
        r: Vec::with_capacity(traj.nodes().len()),
        z: Vec::with_capacity(traj.nodes().len()),
        psi: Vec::with_capacity(traj.nodes().len()),
        v: Vec::with_capacity(traj.nodes().len()),
        dv: Vec::with_capacity(traj.nodes().len()),
    };
    for node in traj.nodes() {
        let big_g = spec.big_g(node.r, node.u);
        let z = node.du * node.du + 2.0 * big_g;
        let rp = node.r.powf(half);
        let v = rp * node.u;
        let dv = rp * node.du + half * node.r.powf(half - 1.0) * node.u;
        let psi = dv * dv + 2.0 * node.r.powf(nf - 1.0) * big_g;
        out.r.push(node.r);
        out.z.push(z);
        out.psi.push(psi);
        out.v.push(v);
        out.dv.push(dv);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonotoneReport {
    pub pass: bool,
    /// Largest observed increase (N >= 2) or largest drift from Z(r0) (N = 1).
    pub max_violation: f64,
    pub tol: f64,
}

/// N >= 2: Z may never increase beyond `1e-8 (1 + Z(r0))`.
/// N = 1: Z must stay within the same tolerance of Z(r0).
pub fn check_z_monotone(mon: &MonitorSeries, n: u32) -> MonotoneReport {
    let z0 = mon.z.first().copied().unwrap_or(0.0);
    let tol = 1e-8 * (1.0 + z0.abs());
    let mut max_violation = 0.0f64;
    if n == 1 {
        for &z in &mon.z {
            max_violation = max_violation.max((z - z0).abs());
        }
    } else {
        for w in mon.z.windows(2) {
            max_violation = max_violation.max(w[1] - w[0]);
        }
    }
    MonotoneReport { pass: max_violation <= tol, max_violation, tol }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    /// Strict decrease of the interleaved sequence
    /// 2G(u(r0)), u'(r1)², 2G(u(r2)), ... within 1e-9 relative.
    pub pass: bool,
    pub links: usize,
    pub max_rel_increase: f64,
    /// Events alternate critical/zero as the chain requires.
    pub interleaving_ok: bool,
    pub sup_u: f64,
    pub sup_u_matches_alpha: bool,
    pub sup_du: f64,
    pub sup_du_bound: f64,
    pub sup_du_within_bound: bool,
}

/// The oscillation chain: centre energy, then alternating squared slopes
/// at zeros and potential energies at critical points, strictly down.
pub fn check_oscillation_chain(
    traj: &Trajectory,
    spec: &NonlinearitySpec,
    alpha: f64,
) -> Result<ChainReport> {
    #[derive(Clone, Copy, PartialEq)]
    enum Kind {
        Zero,
        Crit,
    }
    let mut events: Vec<(f64, Kind)> = traj
        .zeros
        .iter()
        .map(|&r| (r, Kind::Zero))
        .chain(traj.criticals.iter().map(|&(r, _)| (r, Kind::Crit)))
        .collect();
    events.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    if events.len() < 3 {
        return Err(Error::TooFewEvents(events.len()));
    }

    // the centre is a critical point, so the first event must be a zero
    // and kinds must alternate from there
    let mut interleaving_ok = events[0].1 == Kind::Zero;
    for w in events.windows(2) {
        interleaving_ok &= w[0].1 != w[1].1;
    }

    let mut chain = Vec::with_capacity(events.len() + 1);
    chain.push(2.0 * spec.big_g(0.0, alpha));
    for &(r, kind) in &events {
        match kind {
            Kind::Zero => {
                let (_, du) = traj.evaluate(r)?;
                chain.push(du * du);
            }
            Kind::Crit => {
                let (u, _) = traj.evaluate(r)?;
                chain.push(2.0 * spec.big_g(r, u));
            }
        }
    }
    let mut max_rel_increase = f64::NEG_INFINITY;
    for w in chain.windows(2) {
        let rel = (w[1] - w[0]) / w[0].abs().max(1e-300);
        max_rel_increase = max_rel_increase.max(rel);
    }
    // strict decrease, read with a 1e-9 relative tolerance
    let pass = max_rel_increase <= 1e-9;

    let sup_u = traj.sup_u();
    let sup_du = traj.sup_du();
    let sup_du_bound = (2.0 * spec.big_g(0.0, alpha)).max(0.0).sqrt();
    Ok(ChainReport {
        pass,
        links: chain.len(),
        max_rel_increase,
        interleaving_ok,
        sup_u,
        sup_u_matches_alpha: (sup_u - alpha.abs()).abs() <= 1e-8,
        sup_du,
        sup_du_bound,
        sup_du_within_bound: sup_du <= sup_du_bound + 1e-8,
    })
}

/// Envelope decay fit against `r^{(1-N)/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Least-squares slope of log|u| at critical points vs log r.
    pub exponent: f64,
    /// min and max of |u(r_j)| r_j^{(N-1)/2} over the envelope points.
    pub c_low: f64,
    pub c_high: f64,
    pub fit_range: (f64, f64),
    /// RMS residual of the log-log fit.
    pub residual: f64,
    pub n_points: usize,
}

pub fn fit_decay_exponent(traj: &Trajectory, n: u32, r_lo: f64) -> Result<DecayFit> {
    let pts: Vec<(f64, f64)> = traj
        .criticals
        .iter()
        .filter(|&&(r, u)| r >= r_lo && u.abs() > 1e-300)
        .map(|&(r, u)| (r, u.abs()))
        .collect();
    if pts.len() < 10 {
        return Err(Error::InsufficientRange(format!(
            "{} envelope points beyond r = {r_lo}, need 10",
            pts.len()
        )));
    }
    let m = pts.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(r, u) in &pts {
        let x = r.ln();
        let y = u.ln();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let denom = m * sxx - sx * sx;
    let slope = (m * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / m;
    let mut ss = 0.0;
    for &(r, u) in &pts {
        let resid = u.ln() - (intercept + slope * r.ln());
        ss += resid * resid;
    }
    let theory = 0.5 * (f64::from(n) - 1.0);
    let mut c_low = f64::INFINITY;
    let mut c_high = 0.0f64;
    for &(r, u) in &pts {
        let c = u * r.powf(theory);
        c_low = c_low.min(c);
        c_high = c_high.max(c);
    }
    Ok(DecayFit {
        exponent: slope,
        c_low,
        c_high,
        fit_range: (pts[0].0, pts[pts.len() - 1].0),
        residual: (ss / m).sqrt(),
        n_points: pts.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsiReport {
    pub psi_min: f64,
    pub psi_max: f64,
    /// max/min of ψ over the last decade of r.
    pub ratio: f64,
    pub pass: bool,
}

/// Two-sided bounds on ψ beyond `r_star`; the ratio over the last decade
/// of r must be at most 1.5 for a run exhibiting the sharp decay rate.
pub fn check_psi_bounded(mon: &MonitorSeries, r_star: f64) -> Result<PsiReport> {
    let r_end = *mon.r.last().ok_or_else(|| Error::InsufficientRange("empty series".into()))?;
    if r_end < 10.0 * r_star {
        return Err(Error::InsufficientRange(format!(
            "r_max = {r_end} but the check needs at least 10 r_star = {}",
            10.0 * r_star
        )));
    }
    // oscillation beyond r_star: v (hence u) must keep changing sign
    let mut flips = 0;
    let mut prev = 0.0f64;
    for (&r, &v) in mon.r.iter().zip(&mon.v) {
        if r < r_star {
            continue;
        }
        if prev != 0.0 && v != 0.0 && prev.signum() != v.signum() {
            flips += 1;
        }
        if v != 0.0 {
            prev = v;
        }
    }
    if flips < 4 {
        return Err(Error::InsufficientRange(format!(
            "only {flips} sign changes beyond r = {r_star}: no oscillation to bound"
        )));
    }

    let mut psi_min = f64::INFINITY;
    let mut psi_max = 0.0f64;
    let mut dec_min = f64::INFINITY;
    let mut dec_max = 0.0f64;
    for (&r, &p) in mon.r.iter().zip(&mon.psi) {
        if r < r_star {
            continue;
        }
        psi_min = psi_min.min(p);
        psi_max = psi_max.max(p);
        if r >= 0.1 * r_end {
            dec_min = dec_min.min(p);
            dec_max = dec_max.max(p);
        }
    }
    let ratio = dec_max / dec_min;
    Ok(PsiReport { psi_min, psi_max, ratio, pass: psi_min > 0.0 && ratio <= 1.5 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    ConstantZero,
    ConstantAlpha0,
    OscillatingLocalized,
    Periodic,
    Blowup,
    Undetermined,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Verdict::ConstantZero => "constant_zero",
            Verdict::ConstantAlpha0 => "constant_alpha0",
            Verdict::OscillatingLocalized => "oscillating_localized",
            Verdict::Periodic => "periodic",
            Verdict::Blowup => "blowup",
            Verdict::Undetermined => "undetermined",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Evidence {
    pub zero_count: usize,
    pub z_max_violation: Option<f64>,
    pub envelope_decreasing: Option<bool>,
    pub period: Option<f64>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub verdict: Verdict,
    pub evidence: Evidence,
}

/// Conservative decision tree: constants first, then blow-up, then the
/// oscillatory verdicts gated on the monitor checks; anything that fails
/// a check lands in `Undetermined` with the evidence spelled out.
pub fn classify(
    traj: &Trajectory,
    spec: &NonlinearitySpec,
    cfg: &SolveConfig,
) -> Classification {
    let mut ev = Evidence { zero_count: traj.zeros.len(), ..Default::default() };

    if cfg.alpha.abs() <= cfg.atol {
        return Classification { verdict: Verdict::ConstantZero, evidence: ev };
    }
    if spec.is_autonomous() {
        if let Ok(a0) = spec.alpha0(0.0) {
            if a0.is_finite() && (cfg.alpha.abs() - a0).abs() <= 1e-12 {
                return Classification { verdict: Verdict::ConstantAlpha0, evidence: ev };
            }
        }
    }
    if traj.terminated_by == Termination::Blowup {
        return Classification { verdict: Verdict::Blowup, evidence: ev };
    }
    if traj.terminated_by == Termination::StepFailure {
        ev.notes.push("integration ended in step failure".into());
        return Classification { verdict: Verdict::Undetermined, evidence: ev };
    }

    let mon = compute_monitors(traj, spec, cfg.n);
    let zmon = check_z_monotone(&mon, cfg.n);
    ev.z_max_violation = Some(zmon.max_violation);

    if cfg.n == 1 {
        if traj.zeros.len() >= 4 {
            match estimate_period(traj) {
                Ok(period) => {
                    ev.period = Some(period);
                    return Classification { verdict: Verdict::Periodic, evidence: ev };
                }
                Err(e) => ev.notes.push(format!("period check failed: {e}")),
            }
        } else {
            ev.notes.push(format!("only {} zeros computed", traj.zeros.len()));
        }
        return Classification { verdict: Verdict::Undetermined, evidence: ev };
    }

    // N >= 2
    let envelope: Vec<f64> = traj.criticals.iter().map(|&(_, u)| u.abs()).collect();
    let env_dec = envelope.len() >= 2
        && envelope
            .windows(2)
            .all(|w| w[1] <= w[0] + 1e-12 * (1.0 + w[0]));
    ev.envelope_decreasing = Some(env_dec);

    if traj.zeros.len() >= 4 && zmon.pass && env_dec {
        return Classification { verdict: Verdict::OscillatingLocalized, evidence: ev };
    }
    if traj.zeros.len() < 4 {
        ev.notes.push(format!("only {} zeros computed", traj.zeros.len()));
    }
    if !zmon.pass {
        ev.notes.push(format!(
            "Z increased by {} (tolerance {})",
            zmon.max_violation, zmon.tol
        ));
    }
    if !env_dec {
        ev.notes.push("envelope of |u| at critical points is not decreasing".into());
    }
    Classification { verdict: Verdict::Undetermined, evidence: ev }
}

/// Twice the mean zero spacing; errors unless the spacings agree to
/// 1e-8 relative.
pub fn estimate_period(traj: &Trajectory) -> Result<f64> {
    if traj.zeros.len() < 4 {
        return Err(Error::NotPeriodic(format!(
            "{} zeros, need at least 4",
            traj.zeros.len()
        )));
    }
    let spacings: Vec<f64> = traj.zeros.windows(2).map(|w| w[1] - w[0]).collect();
    let mean = spacings.iter().sum::<f64>() / spacings.len() as f64;
    let spread = spacings
        .iter()
        .fold(0.0f64, |m, &s| m.max((s - mean).abs()))
        / mean;
    if spread > 1e-8 {
        return Err(Error::NotPeriodic(format!(
            "zero spacings vary by {spread:.3e} relative (tolerance 1e-8)"
        )));
    }
    Ok(2.0 * mean)
}
