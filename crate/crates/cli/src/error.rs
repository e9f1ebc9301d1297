use thiserror::Error;

/// Failure of a command, carrying its process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed input files, arguments or specifications (exit 2).
    #[error("{0}")]
    Input(String),
    /// Numerical failure during computation (exit 3).
    #[error("{0}")]
    Numeric(String),
    /// The optimizer stopped early; outputs were still written (exit 4).
    #[error("{0}")]
    Convergence(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Convergence(_) => 4,
        }
    }

    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }
}

impl From<svine_core::Error> for CliError {
    fn from(e: svine_core::Error) -> Self {
        use svine_core::Error as E;
        match e {
            E::InvalidInput(_) | E::Domain(_) => CliError::Input(e.to_string()),
            E::NotConverged(_) => CliError::Convergence(e.to_string()),
            E::Numeric(_) | E::NoConvergence { .. } | E::NotPositiveDefinite { .. } => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
