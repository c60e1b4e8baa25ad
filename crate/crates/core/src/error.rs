use thiserror::Error;

/// Errors surfaced by the library.
///
/// The split mirrors how callers react: `Validation` and `Domain` mean the
/// inputs are wrong, `Usage` means the call itself is malformed, and `Guard`
/// means a resource limit would be exceeded.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    Validation(String),
    #[error("value out of domain: {0}")]
    Domain(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("resource guard exceeded: {0}")]
    Guard(String),
    #[error("parse error in {location}: {message}")]
    Parse { location: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
