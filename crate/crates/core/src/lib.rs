//! Numerical laboratory for radially symmetric solutions of
//! `-Δu = g(|x|, u)` on R^N when the linearization at zero has positive
//! slope (`g'(0) > 0`, the nonlinear Helmholtz regime).
//!
//! The crate is organized around one pipeline:
//!
//! * [`nonlinearity`] — the closed catalog of admissible right-hand
//!   sides `g(r, z)` with exact primitives and structural constants;
//! * [`ivp`] — adaptive integration of the singular radial initial value
//!   problem `-u'' - (N-1)/r u' = g(r, u)`, `u(0) = α`, `u'(0) = 0`,
//!   with dense output and refined zero/critical-point events;
//! * [`diagnostics`] — monitor functions, solution classification,
//!   envelope decay fits, and period estimation;
//! * [`continuum`] — sweeps over the shooting value α and behavioral
//!   bracketing of the threshold amplitude;
//! * [`domain`] — the bounded-domain study: radial meshes on balls,
//!   first Dirichlet eigenvalues, and clamped energy minimization.

pub mod continuum;
pub mod diagnostics;
pub mod domain;
pub mod ivp;
pub mod nonlinearity;

mod error;

pub use error::{Error, Result};
