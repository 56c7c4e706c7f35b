use std::path::PathBuf;

use thiserror::Error;

/// Failures surfaced to the shell, each with its own exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config file not found: {}", .0.display())]
    MissingConfig(PathBuf),
    #[error("invalid configuration: {0}")]
    Schema(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Failed(_) => 1,
            CliError::MissingConfig(_) => 3,
            CliError::Schema(_) => 4,
            CliError::Io(_) => 5,
        }
    }
}

impl From<delayband::Error> for CliError {
    fn from(e: delayband::Error) -> Self {
        use delayband::Error as E;
        match e {
            E::Io { .. } => CliError::Io(e.to_string()),
            E::Parse { .. } | E::ConfigMismatch(_) | E::InvalidParameter { .. } | E::DelayPastHorizon { .. } => {
                CliError::Schema(e.to_string())
            }
            other => CliError::Failed(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
