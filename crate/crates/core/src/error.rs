use thiserror::Error;

/// Errors raised by the library and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    /// An abundance or observation outside the model's valid domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A violated precondition: dimension mismatch, invalid weights, empty input.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A computation produced a non-finite value.
    #[error("numeric error: {message}")]
    Numeric {
        message: String,
        /// Abundance at which the failure occurred, when applicable.
        abundance: Option<f64>,
    },

    /// Invalid experiment configuration.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Broad classification used for CLI exit codes and structured error records.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    Numeric,
    Io,
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>, abundance: Option<f64>) -> Self {
        Error::Numeric {
            message: msg.into(),
            abundance,
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Domain(_) | Error::Contract(_) | Error::Config(_) | Error::Json(_) => {
                ErrorClass::Validation
            }
            Error::Numeric { .. } => ErrorClass::Numeric,
            Error::Io(_) | Error::Csv(_) => ErrorClass::Io,
        }
    }

    /// Short machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Contract(_) => "contract",
            Error::Numeric { .. } => "numeric",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}
