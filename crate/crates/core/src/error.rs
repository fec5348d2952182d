use thiserror::Error;

/// Errors reported by every solver in this crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Malformed or out-of-domain input.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// Vector or matrix dimensions do not agree.
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// Inverse of the zero element was requested.
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,

    /// An enumeration or search would exceed the configured budget.
    #[error("budget exceeded: {0}")]
    Budget(String),

    /// A computed certificate failed its independent re-check.
    #[error("verification failed: {0}")]
    Verification(String),

    /// The operation is only defined for a restricted set of dimensions.
    #[error("unsupported dimension k = {0}")]
    UnsupportedDimension(usize),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    /// True for resource-limit failures, as opposed to bad input.
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::Budget(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
