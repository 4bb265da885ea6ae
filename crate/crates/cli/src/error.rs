use thiserror::Error;

/// Failures mapped to process exit codes.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("physics check failed: {0}")]
    Physics(String),

    #[error("size limit: {0}")]
    SizeLimit(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Physics(_) => 3,
            CliError::SizeLimit(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

impl From<iforge_core::Error> for CliError {
    fn from(e: iforge_core::Error) -> Self {
        match e {
            iforge_core::Error::SizeLimit(msg) => CliError::SizeLimit(msg),
            other => CliError::Config(other.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
