use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid spin {0}: J must be a positive integer")]
    InvalidSpin(f64),

    #[error("unsupported spin J = {0}: the parity decomposition needs an even J >= 2")]
    UnsupportedSpin(u32),

    #[error("numerical failure in {context} (residual {residual:.3e})")]
    Numerical { context: &'static str, residual: f64 },

    #[error("transformed operator is not block diagonal (off-block residual {0:.3e})")]
    NotBlockDiagonal(f64),

    #[error("invalid phase-space point: {0}")]
    InvalidPoint(String),

    #[error("state has no oo component (weight {0:.3e})")]
    EmptyProjection(f64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("insufficient data: need at least {needed} points, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("no power-law decay found in the scanned band ({0})")]
    EdgeNotFound(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
