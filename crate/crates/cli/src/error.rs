//! CLI error categories with their process exit codes.

use gradiflux_core::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration or invalid model parameters (exit 2).
    #[error("config error: {0}")]
    Config(String),

    /// Bad dataset file or contents (exit 3).
    #[error("data error: {0}")]
    Data(String),

    /// Numerical failure during evaluation (exit 4).
    #[error("numerical error: {0}")]
    Numerical(String),

    /// Filesystem trouble writing artifacts (exit 1).
    #[error("io error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidParameter { .. }
            | CoreError::Unsupported(_)
            | CoreError::GridInvariant(_) => CliError::Config(e.to_string()),
            CoreError::Dataset(_) => CliError::Data(e.to_string()),
            CoreError::QuadratureNotConverged { .. } | CoreError::DegenerateSuppression { .. } => {
                CliError::Numerical(e.to_string())
            }
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
