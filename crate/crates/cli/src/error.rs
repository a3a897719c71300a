use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] lov_core::Error),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Io { .. } => "io",
            CliError::Core(e) => e.kind(),
        }
    }

    /// 2 for bad input or resources, 3 for broken internal invariants.
    pub fn exit_code(&self) -> u8 {
        match self.kind() {
            "numeric" => 3,
            _ => 2,
        }
    }
}

/// Routes module errors through [`lov_core::Error`].
pub trait CoreResult<T> {
    fn core(self) -> Result<T, CliError>;
}

impl<T, E: Into<lov_core::Error>> CoreResult<T> for Result<T, E> {
    fn core(self) -> Result<T, CliError> {
        self.map_err(|e| CliError::Core(e.into()))
    }
}
