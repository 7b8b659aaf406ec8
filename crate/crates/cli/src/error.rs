use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("manifest {path}: {message}")]
    Manifest { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("grid point {point}: {source}")]
    Numerical {
        point: String,
        #[source]
        source: oofsk_core::Error,
    },
}

impl CliError {
    /// 1 for anything the user can fix in the arguments or manifest,
    /// 2 when the numerics themselves failed.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Numerical { .. } => 2,
            _ => 1,
        }
    }
}
