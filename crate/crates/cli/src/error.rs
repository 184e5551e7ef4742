use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("cannot write {path}: {source}")]
    Output { path: PathBuf, source: io::Error },

    #[error("cannot read {path}: {source}")]
    Input { path: PathBuf, source: io::Error },

    #[error(transparent)]
    Library(#[from] crossing::Error),

    #[error("validation failed")]
    ValidationFailed,

    #[error("{0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// `2` for problems with the invocation, `1` for failed runs.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Output { .. } | CliError::Input { .. } => 2,
            CliError::Library(crossing::Error::InvalidParameter(_) | crossing::Error::Parse(_)) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
