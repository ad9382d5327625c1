use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, HarnessError>;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Solver(#[from] sparse_lowrank::Error),

    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl HarnessError {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        HarnessError::Config(msg.into())
    }

    /// Process exit status: 2 for bad configuration, 3 for solver failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Solver(sparse_lowrank::Error::Parse { .. }) => 2,
            HarnessError::Solver(_) => 3,
            HarnessError::Io { .. } => 1,
        }
    }
}
