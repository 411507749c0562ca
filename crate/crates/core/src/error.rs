use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter falls outside the domain of the operation it feeds.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// Packing radii leave no room for any center.
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    /// A codeword violates the power constraint or is otherwise unusable.
    #[error("invalid codeword: {0}")]
    InvalidCodeword(String),

    #[error("message index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("empty codebook")]
    EmptyCodebook,

    #[error("empty fading support")]
    EmptySupport,

    #[error("empty gain grid")]
    EmptyGrid,

    #[error("malformed document: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
