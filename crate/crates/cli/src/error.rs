use thiserror::Error;

/// Failures of a run, each mapped to an exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("schema error at {pointer:?}: {message}")]
    Schema { pointer: String, message: String },

    #[error("{0}")]
    Input(String),

    #[error(transparent)]
    Core(#[from] weyl_core::Error),

    #[error("{0}")]
    Io(#[from] std::io::Error),

    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Verification(_) => 1,
            _ => 2,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::Io(std::io::Error::other(e))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::Io(std::io::Error::other(e))
    }
}
