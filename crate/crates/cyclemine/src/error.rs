use thiserror::Error;

/// Errors raised while loading, building or scoring patterns.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{0}")]
    Domain(String),
    #[error("empty sequence")]
    EmptySequence,
    #[error("invalid cycle: {0}")]
    InvalidCycle(String),
    #[error("invalid pattern: {0}")]
    InvalidPattern(String),
    #[error("uncodable pattern: {0}")]
    Uncodable(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn uncodable(msg: impl Into<String>) -> Error {
    Error::Uncodable(msg.into())
}
