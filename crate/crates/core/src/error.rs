use thiserror::Error;

pub type Result<T> = std::result::Result<T, WgError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WgError {
    #[error("invalid mesh resolution n = {0}, must be at least 1")]
    InvalidResolution(usize),

    #[error("quadrature request out of range: {0}")]
    QuadratureOutOfRange(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("conjugate gradient did not converge in {iterations} iterations (residual {residual:e})")]
    MaxIterations { iterations: usize, residual: f64 },

    #[error("time march diverged at step {step}: norm {norm:e}")]
    InstabilityDetected { step: usize, norm: f64 },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("table shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("internal fault: {0}")]
    Internal(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for WgError {
    fn from(e: std::io::Error) -> Self {
        WgError::Io(e.to_string())
    }
}
