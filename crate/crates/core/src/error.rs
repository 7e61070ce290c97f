//! Crate-wide error type.

use thiserror::Error;

/// Errors raised by the optimizers, generators and validators.
#[derive(Debug, Error)]
pub enum Error {
    /// A storage task cannot be satisfied by the remaining warehouse capacity.
    #[error("infeasible task: {0}")]
    InfeasibleTask(String),

    /// A pick list cannot be satisfied from the current warehouse supply.
    #[error("infeasible order: {0}")]
    InfeasibleOrder(String),

    /// The warehouse model or a parameter set is internally inconsistent.
    #[error("configuration error: {0}")]
    Configuration(String),

    /// An operation was called with arguments outside its contract.
    #[error("usage error: {0}")]
    Usage(String),

    /// A document could not be parsed or written.
    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn infeasible_task(msg: impl Into<String>) -> Self {
        Error::InfeasibleTask(msg.into())
    }

    pub fn infeasible_order(msg: impl Into<String>) -> Self {
        Error::InfeasibleOrder(msg.into())
    }

    pub fn configuration(msg: impl Into<String>) -> Self {
        Error::Configuration(msg.into())
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
