use thiserror::Error;

/// Errors raised by the simulation building blocks.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("index out of range: {0}")]
    Range(String),
    #[error("frame error: {0}")]
    Frame(String),
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error("estimation failed: {0}")]
    Estimation(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
