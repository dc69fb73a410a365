use std::io;
use std::path::Path;

use thiserror::Error;

/// Failure of a command, classified by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Io(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    /// 2 for invalid input, 3 for numerical failures, 4 for I/O problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    pub fn io(path: &Path, err: io::Error) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }
}

impl From<difftomo::Error> for CliError {
    fn from(e: difftomo::Error) -> Self {
        use difftomo::Error as E;
        match e {
            E::InvalidArgument(m) => CliError::Validation(m),
            E::Numerical(m) => CliError::Numerical(m),
            E::Format(m) => CliError::Io(format!("malformed file: {m}")),
            E::Io(e) => CliError::Io(e.to_string()),
            E::Json(e) => CliError::Io(format!("JSON: {e}")),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(format!("JSON: {e}"))
    }
}
