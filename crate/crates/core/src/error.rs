use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Identifies one represented particle, or the implicit conjugate of an
/// upper particle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", content = "index", rename_all = "snake_case")]
pub enum ParticleRef {
    Real(usize),
    Upper(usize),
    Conjugate(usize),
}

impl fmt::Display for ParticleRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParticleRef::Real(i) => write!(f, "real[{i}]"),
            ParticleRef::Upper(i) => write!(f, "upper[{i}]"),
            ParticleRef::Conjugate(i) => write!(f, "conj(upper[{i}])"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed configuration: {0}")]
    MalformedConfiguration(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("k = {k} and n = {n} must have the same parity")]
    Parity { n: usize, k: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("collision between {a} and {b} (separation {separation:e})")]
    Collision { a: ParticleRef, b: ParticleRef, separation: f64 },

    #[error("guard trip at step {step} after {halvings} halvings: {a} and {b} at separation {separation:e}")]
    GuardTrip { step: usize, halvings: u32, a: ParticleRef, b: ParticleRef, separation: f64 },

    #[error("relaxation stalled after {steps} steps with rms gradient {rms_gradient:e} (tolerance {tolerance:e})")]
    RelaxationStalled { steps: usize, rms_gradient: f64, tolerance: f64 },

    #[error("eigenvalue solver did not converge within {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("infeasible oracle: {accepted} of {trials} matrices had k = {k} real eigenvalues (n = {n}); use the MCMC sampler")]
    Infeasible { n: usize, k: usize, accepted: usize, trials: usize },

    #[error("root finding failed: {0}")]
    NoSignChange(String),

    #[error("resolution mismatch: {0}")]
    Resolution(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Collision { .. }
                | Error::GuardTrip { .. }
                | Error::RelaxationStalled { .. }
                | Error::NonConvergence { .. }
                | Error::Infeasible { .. }
                | Error::NoSignChange(_)
        )
    }
}
