use thiserror::Error;

/// Error type shared by every fallible operation in the crate.
#[derive(Debug, Error)]
pub enum CalibError {
    /// An argument violated a documented precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// A model could not be fitted from the given data.
    #[error("fit error: {0}")]
    Fit(String),

    /// An iterative routine failed to converge or produced non-finite values.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// A run configuration is inconsistent or could not be resolved.
    #[error("config error: {0}")]
    Config(String),

    /// A file could not be read, written, or parsed.
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for CalibError {
    fn from(e: std::io::Error) -> Self {
        CalibError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CalibError>;
