use std::path::{Path, PathBuf};

use thiserror::Error;

/// Failure of a CLI command, mapped to a process exit code by [`CliError::exit_code`].
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    /// Input that cannot be parsed. `location` names a line or byte offset.
    #[error("{}: {location}: {message}", path.display())]
    Parse {
        path: PathBuf,
        location: String,
        message: String,
    },
    /// Well-formed input that violates a domain constraint.
    #[error("{0}")]
    Validation(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } | CliError::Parse { .. } => 2,
            CliError::Validation(_) => 3,
        }
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn parse(
        path: &Path,
        location: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        CliError::Parse {
            path: path.to_path_buf(),
            location: location.into(),
            message: message.into(),
        }
    }
}

impl From<pcrps_core::Error> for CliError {
    fn from(e: pcrps_core::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
