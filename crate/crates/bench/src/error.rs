use std::path::PathBuf;

use mfg_core::{EnvError, GarnetError, SolverError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Garnet(#[from] GarnetError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("non-finite final exploitability {0}")]
    NonFinite(f64),
}

impl HarnessError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.into(), source }
    }

    /// Bad input is a configuration problem (exit 2); everything else is a failed run (exit 1).
    pub fn is_config_error(&self) -> bool {
        match self {
            HarnessError::Config(_) | HarnessError::Env(_) | HarnessError::Garnet(_) => true,
            HarnessError::Solver(e) => matches!(e, SolverError::UnknownAlgorithm(_) | SolverError::InvalidConfig(_)),
            HarnessError::Io { .. } | HarnessError::NonFinite(_) => false,
        }
    }

    pub fn exit_code(&self) -> i32 {
        if self.is_config_error() {
            2
        } else {
            1
        }
    }
}
