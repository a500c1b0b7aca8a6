use thiserror::Error;

/// Failures of a CLI verb, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("cannot read {path}: {message}")]
    Input { path: String, message: String },
    #[error("solver: {0}")]
    Solver(fractal_hm::Error),
    #[error("result has no planar coordinates for vertex {0}")]
    MissingCoordinates(String),
    #[error("verification failed: {0}")]
    Mismatch(String),
}

impl From<fractal_hm::Error> for CliError {
    fn from(e: fractal_hm::Error) -> Self {
        CliError::Solver(e)
    }
}

impl CliError {
    pub fn config(e: impl std::fmt::Display) -> Self {
        CliError::Config(e.to_string())
    }

    /// 2 for bad input, 3 for solver failures, 4 for verification mismatches.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Input { .. } | CliError::MissingCoordinates(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Mismatch(_) => 4,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
