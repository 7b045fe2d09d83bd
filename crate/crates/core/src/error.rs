use thiserror::Error;

/// Errors produced by the shared protocol model.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// An encoded message reached the 1 KB wire budget.
    #[error("encoded message is {0} bytes, at or over the 1024-byte wire budget")]
    EncodingOverflow(usize),
    /// Input that is not even syntactically a protocol message.
    #[error("malformed message: {0}")]
    MalformedMessage(String),
    /// Syntactically valid input that violates a message schema: wrong kind,
    /// missing or extra fields, or a field of the wrong shape or range.
    #[error("schema violation: {0}")]
    SchemaViolation(String),
    /// Key material that does not decode to a usable key.
    #[error("invalid key material: {0}")]
    InvalidKey(String),
}

pub type Result<T> = std::result::Result<T, Error>;
