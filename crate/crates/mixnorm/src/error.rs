use thiserror::Error;

/// Errors produced by configuration validation and numerical evaluation.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter lies outside its admissible range.
    #[error("domain error: {0}")]
    Domain(String),

    /// A quadrature sample or intermediate value was NaN/inf.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// An unknown family tag or malformed family parameters.
    #[error("unknown family: {0}")]
    UnknownFamily(String),

    /// A run-configuration file could not be parsed or is inconsistent.
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
