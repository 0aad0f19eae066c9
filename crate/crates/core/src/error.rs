use thiserror::Error;

/// Errors raised by the test toolkit.
#[derive(Error, Debug)]
pub enum Error {
    /// An argument lies outside the domain the operation accepts.
    #[error("invalid parameter: {0}")]
    Parameter(String),
    /// The request is well-formed but too large to compute exactly.
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    /// An external compressor could not be run or misbehaved.
    #[error("compressor failed: {0}")]
    Compressor(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
