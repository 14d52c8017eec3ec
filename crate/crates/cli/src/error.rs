use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad arguments or input that failed validation.
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Library(#[from] dirkit::Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Csv(#[from] csv::Error),
    /// One or more self-test checks failed.
    #[error("{0}")]
    Check(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Check(_) => 1,
            _ => 2,
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
