use thiserror::Error;

/// Errors produced by the `elma` library.
#[derive(Debug, Error)]
pub enum ElmaError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("shape mismatch: expected {expected:?}, got {actual:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("svd did not converge after {sweeps} sweeps (max normalized off-diagonal {off_diagonal:e})")]
    SvdNoConvergence { sweeps: usize, off_diagonal: f64 },

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, ElmaError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(ElmaError::InvalidParameter(msg.into()))
}
