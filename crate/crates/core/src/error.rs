use thiserror::Error;

/// Errors raised by the disc operators and the solvers built on them.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("expected a {expected} field, got a {found} field")]
    RankMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("data is not mean-zero: integral {value:e} exceeds tolerance {tol:e}")]
    NotMeanZero { value: f64, tol: f64 },

    #[error("radial solve failed for mode {mode}: {reason}")]
    SolverFailure { mode: usize, reason: String },

    #[error("time stepping became unstable at step {step} (energy {energy:e})")]
    Instability { step: usize, energy: f64 },

    #[error("time slice {index} failed: {source}")]
    Slice {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("hypothesis violated at rho = {rho}, r = {r}: {lhs:e} > {rhs:e}")]
    HypothesisViolation {
        rho: f64,
        r: f64,
        lhs: f64,
        rhs: f64,
    },

    #[error("residual {value:e} above tolerance {tol:e} at {location}")]
    Residual {
        value: f64,
        tol: f64,
        location: String,
    },

    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
