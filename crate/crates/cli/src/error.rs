//! CLI error type with its process exit codes.

use thiserror::Error;

/// Exit codes: 2 validation, 3 numerical, 4 I/O.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("validation error: {0}")]
    Validation(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }
}

impl From<eit_core::Error> for CliError {
    fn from(e: eit_core::Error) -> Self {
        use eit_core::Error as E;
        match &e {
            E::IntegrationDiverged { .. }
            | E::SingularParameters(_)
            | E::NoSteadyState(_)
            | E::NoDispersivePhase
            | E::EigenFailed
            | E::NotPositive { .. }
            | E::UnphysicalSusceptibility { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
