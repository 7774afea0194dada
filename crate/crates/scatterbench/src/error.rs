//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("potential support touches the padding shell: {0}")]
    SupportExceedsBox(String),

    #[error("invalid wave parameters: {0}")]
    InvalidWave(String),

    #[error("iterative solve did not converge after {iterations} iterations (residual {residual:.3e}); the operator may be near-singular (k close to a pole i*kappa)")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("frequency-kernel singularity: {0}")]
    EwaldSingularity(String),

    #[error("operation requires eta > 0 (got eta = {0})")]
    EtaZero(f64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("adaptive quadrature failed to reach tolerance {tol:.1e} within {evals} evaluations")]
    QuadratureNonConvergent { tol: f64, evals: usize },

    #[error("frequency coverage too sparse: {uncovered:.1}% of target nodes have no sample within one cell radius (limit 20%)")]
    Coverage { uncovered: f64 },

    #[error("fixed-point refinement diverged: data misfit increased for two consecutive iterations (at iteration {at_iter})")]
    Divergence { at_iter: usize },

    #[error("partial-wave series needs more than {0} terms; truncation criterion not met")]
    TruncationFailure(usize),

    #[error("config validation failed at `{field}`: {message}")]
    ConfigValidation { field: String, message: String },

    #[error("container format error: {0}")]
    Container(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
