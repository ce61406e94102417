use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// System size was zero.
    #[error("system size must be at least 1")]
    InvalidSize,

    /// A configuration or field vector did not match the coupling matrix.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A named parameter failed validation.
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    /// A call was made with an argument outside its domain.
    #[error("{0}")]
    InvalidArgument(String),

    /// An exact-enumeration routine was asked for a system too large to enumerate.
    #[error("system size {n} exceeds enumeration limit {limit}")]
    SizeLimit { n: usize, limit: usize },
}

impl Error {
    pub(crate) fn param(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
