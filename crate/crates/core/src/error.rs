use thiserror::Error;

/// Errors raised by the tomography library.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("singular matrix: pivot magnitude {pivot:.3e} below {threshold:.0e}")]
    SingularMatrix { pivot: f64, threshold: f64 },

    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("total degree {degree} exceeds cap {cap}")]
    DegreeCapExceeded { degree: usize, cap: usize },

    #[error("invalid squeeze parameters: {0}")]
    InvalidSqueezeParams(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("quadrature grid too coarse: refinements differ by {0:.3e}")]
    GridTooCoarse(f64),

    #[error("truncation risk: |alpha|^2 = {alpha_sq:.3} exceeds cutoff/4 = {limit:.3}")]
    TruncationRisk { alpha_sq: f64, limit: f64 },

    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
