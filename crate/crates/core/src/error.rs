use thiserror::Error;

/// Errors raised by the solvers, factorizations and problem builders.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not positive definite (pivot {pivot} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("singular system: zero pivot at row {0}")]
    SingularSystem(usize),

    #[error("Gram matrix of the difference window is singular")]
    SingularGram,

    #[error("all history columns were dropped from the least-squares window")]
    EmptyWindow,

    #[error("Krylov matrix is rank deficient at column {0}")]
    DegenerateKrylov(usize),

    #[error("interval [{a}, {b}] must satisfy a < b and exclude 0 and 1")]
    InvalidInterval { a: f64, b: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}
