//! Sweeps over the shooting value α and behavioral localization of the
//! threshold amplitude separating oscillation from blow-up.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{classify, fit_decay_exponent, Verdict};
use crate::ivp::{integrate, SolveConfig};
use crate::nonlinearity::NonlinearitySpec;
use crate::{Error, Result};

/// Doubling cap for the blow-up probe in [`bracket_threshold`].
pub const THRESHOLD_SEARCH_CAP: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub verdict: Verdict,
    pub first_zero: Option<f64>,
    pub zero_count: usize,
    pub sup_u: f64,
    pub sup_du: f64,
    pub decay_exponent: Option<f64>,
    pub z_final: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// FNV-1a digest of the spec, dimension, and solver configuration.
    pub spec_digest: String,
    /// max |Δ first_zero| / |Δ alpha| over adjacent oscillatory rows: a
    /// grid-continuity diagnostic for the solution family.
    pub continuity_max_slope: Option<f64>,
}

/// One solve + classification per α; rows are computed independently
/// (in parallel) and merged in α order. Per-row failures are recorded,
/// never propagated.
pub fn sweep_alpha(
    spec: &NonlinearitySpec,
    n: u32,
    alphas: &[f64],
    cfg_base: &SolveConfig,
) -> SweepResult {
    let mut rows: Vec<SweepRow> = alphas
        .par_iter()
        .map(|&alpha| {
            let cfg = SolveConfig { n, alpha, ..*cfg_base };
            match integrate(spec, &cfg) {
                Err(e) => SweepRow {
                    alpha,
                    verdict: Verdict::Undetermined,
                    first_zero: None,
                    zero_count: 0,
                    sup_u: f64::NAN,
                    sup_du: f64::NAN,
                    decay_exponent: None,
                    z_final: f64::NAN,
                    error: Some(e.to_string()),
                },
                Ok(traj) => {
                    let class = classify(&traj, spec, &cfg);
                    let decay_exponent = if class.verdict == Verdict::OscillatingLocalized {
                        fit_decay_exponent(&traj, n, (0.25 * cfg.r_max).min(50.0))
                            .ok()
                            .map(|f| f.exponent)
                    } else {
                        None
                    };
                    let last = traj.nodes().last().copied();
                    let z_final = last.map_or(f64::NAN, |node| {
                        node.du * node.du + 2.0 * spec.big_g(node.r, node.u)
                    });
                    SweepRow {
                        alpha,
                        verdict: class.verdict,
                        first_zero: traj.first_zero(),
                        zero_count: traj.zeros.len(),
                        sup_u: traj.sup_u(),
                        sup_du: traj.sup_du(),
                        decay_exponent,
                        z_final,
                        error: None,
                    }
                }
            }
        })
        .collect();
    rows.sort_by(|a, b| a.alpha.partial_cmp(&b.alpha).unwrap());

    let mut continuity: Option<f64> = None;
    for w in rows.windows(2) {
        if let (Some(z0), Some(z1)) = (w[0].first_zero, w[1].first_zero) {
            let osc = |v: Verdict| matches!(v, Verdict::OscillatingLocalized | Verdict::Periodic);
            if osc(w[0].verdict) && osc(w[1].verdict) && w[1].alpha != w[0].alpha {
                let slope = ((z1 - z0) / (w[1].alpha - w[0].alpha)).abs();
                continuity = Some(continuity.map_or(slope, |c: f64| c.max(slope)));
            }
        }
    }

    SweepResult {
        rows,
        spec_digest: digest(spec, n, cfg_base, alphas),
        continuity_max_slope: continuity,
    }
}

/// Default sweep grid: `count` values geometric from `1e-3 α₀` to
/// `(1 - 1e-3) α₀`, resolving both the small-amplitude (linear) regime
/// and the near-threshold regime.
pub fn default_alphas(alpha0: f64, count: usize) -> Vec<f64> {
    assert!(alpha0.is_finite() && alpha0 > 0.0 && count >= 2);
    let lo = 1e-3 * alpha0;
    let hi = (1.0 - 1e-3) * alpha0;
    (0..count)
        .map(|j| lo * (hi / lo).powf(j as f64 / (count - 1) as f64))
        .collect()
}

fn digest(spec: &NonlinearitySpec, n: u32, cfg: &SolveConfig, alphas: &[f64]) -> String {
    let text = format!(
        "{}|n={n}|rmax={}|rtol={}|atol={}|r0={}|bf={}|alphas={alphas:?}",
        serde_json::to_string(spec).unwrap_or_default(),
        cfg.r_max,
        cfg.rtol,
        cfg.atol,
        cfg.r0,
        cfg.blowup_factor,
    );
    // FNV-1a, 64-bit
    let mut h: u64 = 0xcbf29ce484222325;
    for b in text.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdBracket {
    pub alpha_lo: f64,
    pub alpha_hi: f64,
    /// Closed-form first zero of g(0, .), when finite.
    pub closed_form: Option<f64>,
    /// |midpoint - closed_form| <= 1e-5, when a closed form exists.
    pub agrees_with_closed_form: Option<bool>,
}

/// Bisect the verdict boundary between oscillation and blow-up to width
/// 1e-6. Purely behavioral: only solve + classify are consulted; the
/// closed-form α₀ is attached afterwards for cross-checking.
pub fn bracket_threshold(
    spec: &NonlinearitySpec,
    n: u32,
    cfg_base: &SolveConfig,
) -> Result<ThresholdBracket> {
    let blows_up = |alpha: f64| -> Result<bool> {
        let cfg = SolveConfig { n, alpha, ..*cfg_base };
        let traj = integrate(spec, &cfg)?;
        Ok(classify(&traj, spec, &cfg).verdict == Verdict::Blowup)
    };

    // find a blow-up amplitude by doubling
    let mut hi = 1.0;
    while !blows_up(hi)? {
        hi *= 2.0;
        if hi > THRESHOLD_SEARCH_CAP {
            return Err(Error::NoBracket { cap: THRESHOLD_SEARCH_CAP });
        }
    }
    // and a non-blow-up amplitude by halving
    let mut lo = 0.5 * hi;
    while blows_up(lo)? {
        lo *= 0.5;
        if lo < 1.0 / THRESHOLD_SEARCH_CAP {
            return Err(Error::NoBracket { cap: THRESHOLD_SEARCH_CAP });
        }
    }

    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if blows_up(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }

    let closed_form = spec.alpha0(0.0).ok().filter(|a| a.is_finite());
    let agrees = closed_form.map(|a0| (0.5 * (lo + hi) - a0).abs() <= 1e-5);
    Ok(ThresholdBracket {
        alpha_lo: lo,
        alpha_hi: hi,
        closed_form,
        agrees_with_closed_form: agrees,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirstZeroReport {
    /// (alpha, first zero) in sweep order.
    pub pairs: Vec<(f64, f64)>,
    /// Whether r1 strictly increased along the list.
    pub strictly_increasing: bool,
}

/// First-zero ordering along an increasing list of shooting values in
/// (0, α₀), for specs with `g(z)/z` nonincreasing on that range. A
/// decrease of the first zero is an error; ties (the linear case) are
/// reported with `strictly_increasing = false`.
pub fn first_zero_monotonicity(
    spec: &NonlinearitySpec,
    n: u32,
    alphas: &[f64],
    cfg_base: &SolveConfig,
) -> Result<FirstZeroReport> {
    // precondition: z -> g(z)/z nonincreasing on (0, alpha0)
    let a0 = spec.alpha0(0.0)?;
    let probe_hi = if a0.is_finite() { a0 * (1.0 - 1e-6) } else { 10.0 };
    let mut prev_ratio = f64::INFINITY;
    for j in 1..=256 {
        let z = probe_hi * j as f64 / 256.0;
        let ratio = spec.g(0.0, z) / z;
        if ratio > prev_ratio * (1.0 + 1e-12) + 1e-15 {
            return Err(Error::HypothesesFail(format!(
                "g(z)/z increased near z = {z}; first-zero ordering needs it nonincreasing"
            )));
        }
        prev_ratio = ratio;
    }

    let mut pairs = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let cfg = SolveConfig { n, alpha, ..*cfg_base };
        let traj = integrate(spec, &cfg)?;
        let r1 = traj.first_zero().ok_or_else(|| {
            Error::InsufficientRange(format!("no zero found for alpha = {alpha}"))
        })?;
        pairs.push((alpha, r1));
    }

    let mut strictly = true;
    for w in pairs.windows(2) {
        let tol = 1e-9 * (1.0 + w[0].1);
        if w[1].1 < w[0].1 - tol {
            return Err(Error::MonotonicityFail {
                alpha_lo: w[0].0,
                r1_lo: w[0].1,
                alpha_hi: w[1].0,
                r1_hi: w[1].1,
            });
        }
        strictly &= w[1].1 > w[0].1 + tol;
    }
    Ok(FirstZeroReport { pairs, strictly_increasing: strictly })
}
