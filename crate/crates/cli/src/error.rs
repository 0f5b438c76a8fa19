use std::path::PathBuf;

use thiserror::Error;

use crate::config::ConfigErrors;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration:\n{0}")]
    Config(#[from] ConfigErrors),

    #[error(transparent)]
    Core(#[from] pursuit_core::Error),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{0}")]
    Input(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

/// Process exit status.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Success = 0,
    /// A property check found a violation.
    Violation = 1,
    /// Bad flags, config, or input file.
    InvalidInput = 2,
    /// A run finished but its outcome class was not the expected one.
    UnexpectedOutcome = 3,
}

impl Status {
    pub fn code(self) -> u8 {
        self as u8
    }
}
