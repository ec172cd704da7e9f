use thiserror::Error;

/// Errors raised by the library and the batch driver.
#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A caller-side precondition (sampling density, level count, ...) was not met.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A physics check evaluated to false.
    #[error("check failed: {0}")]
    Check(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn precondition<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Precondition(msg.into()))
}
