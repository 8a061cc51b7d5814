//! Process-level error taxonomy. Exit codes are stable API:
//! 0 success, 2 input/schema, 3 physics domain, 4 non-convergence.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable, malformed, or schema-violating input.
    #[error("{0}")]
    Input(String),
    /// Physically inadmissible request (e.g. zero detected shot noise).
    #[error("{0}")]
    Domain(String),
    /// The fit finished without converging; a partial report was emitted.
    #[error("{0}")]
    NonConvergence(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Domain(_) => 3,
            CliError::NonConvergence(_) => 4,
        }
    }
}

impl From<cohmap_core::Error> for CliError {
    fn from(e: cohmap_core::Error) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
