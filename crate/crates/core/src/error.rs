use thiserror::Error;

/// Errors raised by the library. Search outcomes such as "no certificate" or
/// "cap exceeded" are not errors; they are part of the returned values.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid certificate: {0}")]
    InvalidCertificate(String),

    #[error("invalid template: {0}")]
    InvalidTemplate(String),

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("instance too large: {0}")]
    Oversized(String),

    #[error("internal consistency check failed: {0}")]
    Internal(String),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
