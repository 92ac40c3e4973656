use thiserror::Error;

/// Errors raised by the library. The CLI maps every variant to exit code 2.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("domain violation: {0}")]
    DomainViolation(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("enumeration cap exceeded: {0}")]
    CapExceeded(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("incomplete table, missing: {}", .0.join(", "))]
    IncompleteTable(Vec<String>),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::DomainViolation(msg.into()))
}
