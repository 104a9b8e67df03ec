use std::path::PathBuf;

use thiserror::Error;

use crate::secure_matrix::SecureFunction;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// No exponent in `[-bound, bound]` maps to the target element.
    #[error("discrete log not found in [-{bound}, {bound}]")]
    NotInRange { bound: u64 },

    #[error("dlog bound {bound} is too large for a group of order {order_bits} bits")]
    BoundTooLarge { bound: u64, order_bits: u64 },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// A function key was used against a ciphertext (or operand) it was not issued for.
    #[error("function key does not match: {0}")]
    KeyMismatch(String),

    #[error("division by an operand congruent to zero")]
    DivisorZero,

    #[error("function {0:?} is not in the permitted set")]
    UnsupportedFunction(SecureFunction),

    #[error("value {value} outside the representable range ±{limit}")]
    OutOfRange { value: f64, limit: f64 },

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("malformed input at {position}: {message}")]
    MalformedInput { position: String, message: String },

    #[error("malformed key request: {0}")]
    MalformedRequest(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("iteration {iteration}, {stage}: {source}")]
    Training {
        iteration: usize,
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn malformed(position: impl Into<String>, message: impl Into<String>) -> Self {
        Error::MalformedInput {
            position: position.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Errors raised by the cryptographic layer (bounds, keys, ranges) rather
    /// than by IO or input parsing.
    pub fn is_crypto(&self) -> bool {
        match self {
            Error::NotInRange { .. }
            | Error::BoundTooLarge { .. }
            | Error::KeyMismatch(_)
            | Error::DivisorZero
            | Error::OutOfRange { .. }
            | Error::UnsupportedFunction(_) => true,
            Error::Training { source, .. } => source.is_crypto(),
            _ => false,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::malformed(format!("line {}, column {}", e.line(), e.column()), e.to_string())
    }
}
