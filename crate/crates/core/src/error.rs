use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A value lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A parameter is out of range or the arguments are inconsistent.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// User-supplied data (samples, function values, files) is unusable.
    #[error("invalid input: {0}")]
    Input(String),

    /// The requested route does not exist for this kernel.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A computation lost too much accuracy to be trusted.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("malformed coefficient file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}
