//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An index fell outside the summation horizon `0..N`.
    #[error("index {index} outside summation horizon 0..{horizon}")]
    IndexOutOfRange { index: i64, horizon: usize },

    /// A polynomial degree beyond the existence bound was requested.
    #[error("degree {degree} exceeds the existence bound for horizon N={horizon}")]
    DegreeOverflow { degree: usize, horizon: usize },

    /// Parameter combination violating an operation's precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A matrix expected to be symmetric positive definite was not.
    #[error("matrix is not symmetric positive definite")]
    NotPositiveDefinite,

    /// Mismatched matrix or vector dimensions.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Non-finite data where finite values are required.
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    /// Iterative numerics stalled or diverged.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
