use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("g(r, .) has positive slope nowhere at r = {r}: g'(r, 0) = {slope}")]
    NoPositiveSlope { r: f64, slope: f64 },
    #[error("no sign change of g(r, .) found on (0, {cap}]")]
    NoSignChange { cap: f64 },
    #[error("hypothesis checks failed: {0}")]
    HypothesesFail(String),
    #[error("radius {r} outside the computed range [{lo}, {hi}]")]
    OutOfRange { r: f64, lo: f64, hi: f64 },
    #[error("too few events for the oscillation chain: {0} found, 3 needed")]
    TooFewEvents(usize),
    #[error("insufficient radial range: {0}")]
    InsufficientRange(String),
    #[error("trajectory is not periodic: {0}")]
    NotPeriodic(String),
    #[error("no oscillating/blow-up bracket below the search cap {cap}")]
    NoBracket { cap: f64 },
    #[error(
        "first zero decreased between alpha = {alpha_lo} (r1 = {r1_lo}) and alpha = {alpha_hi} (r1 = {r1_hi})"
    )]
    MonotonicityFail {
        alpha_lo: f64,
        r1_lo: f64,
        alpha_hi: f64,
        r1_hi: f64,
    },
    #[error("iteration did not converge: {0}")]
    NoConvergence(String),
    #[error("mesh error: {0}")]
    Mesh(String),
}

pub type Result<T> = std::result::Result<T, Error>;
