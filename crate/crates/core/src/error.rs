use std::io;

/// Errors raised by the tripweaver pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A venue id (or user id) that is not present where it was expected.
    #[error("lookup error: {0}")]
    Lookup(String),
    /// An argument outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Input data that could not be interpreted.
    #[error("format error: {0}")]
    Format(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn lookup(msg: impl Into<String>) -> Self {
        Error::Lookup(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
