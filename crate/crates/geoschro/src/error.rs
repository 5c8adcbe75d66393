use std::path::PathBuf;

use thiserror::Error;

/// Everything the command line can fail with. Each variant maps to a
/// process exit code via [`CliError::exit_code`].
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    /// `pointer` is an RFC 6901 JSON pointer into the configuration.
    #[error("config {pointer}: {message}")]
    Schema { pointer: String, message: String },
    #[error("config {pointer}: unknown operator {name:?}")]
    UnknownOperator { pointer: String, name: String },
    #[error("unknown verification suite {0:?}")]
    UnknownSuite(String),
    #[error("invalid tolerance override {0:?}")]
    BadTolerance(String),
    #[error(transparent)]
    Numeric(#[from] geoschro_core::Error),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("missing input {0}")]
    MissingInput(PathBuf),
    #[error("verification failed: {0}")]
    VerificationFailed(String),
}

impl CliError {
    pub fn schema(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Schema { pointer: pointer.into(), message: message.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. }
            | CliError::Schema { .. }
            | CliError::UnknownOperator { .. }
            | CliError::UnknownSuite(_)
            | CliError::BadTolerance(_) => 1,
            CliError::Numeric(_) => 2,
            CliError::Io { .. } | CliError::MissingInput(_) => 3,
            CliError::VerificationFailed(_) => 4,
        }
    }
}
