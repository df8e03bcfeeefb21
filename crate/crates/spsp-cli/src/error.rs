//! CLI error type with process exit codes.

use spsp::SpspError;
use thiserror::Error;

/// Errors surfaced to the terminal, grouped by exit code:
/// 2 for input/configuration problems, 3 for numeric failures, 4 for I/O.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Numeric(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Input(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<SpspError> for CliError {
    fn from(e: SpspError) -> Self {
        match &e {
            SpspError::NoConvergence { .. } | SpspError::Singular(_) => {
                CliError::Numeric(e.to_string())
            }
            SpspError::Io(_) => CliError::Io(e.to_string()),
            SpspError::DimensionMismatch(_)
            | SpspError::ConstantColumn { .. }
            | SpspError::NonFinite(_) => CliError::Input(e.to_string()),
            SpspError::BadGrid(_)
            | SpspError::BadPenalty(_)
            | SpspError::EmptyPath(_)
            | SpspError::BadFolds { .. }
            | SpspError::Unsupported(_)
            | SpspError::UnknownDesign(_)
            | SpspError::BadOverride(_) => CliError::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
