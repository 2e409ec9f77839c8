use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {err}", path = .0.display(), err = .1)]
    Spec(PathBuf, calabi_core::Error),
    #[error(transparent)]
    Core(#[from] calabi_core::Error),
    #[error("{path}: {err}", path = .0.display(), err = .1)]
    Io(PathBuf, std::io::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// 2 for spec/validation problems, 3 when the map is not rigid near a
    /// boundary, 4 for numerical non-convergence, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Spec(_, e) | CliError::Core(e) => e.exit_code(),
            CliError::Usage(_) => 2,
            CliError::Io(..) => 1,
        }
    }
}
