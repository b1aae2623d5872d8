use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numeric(herald_core::Error),
    #[error("{0}")]
    Acceptance(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Io(_) => 1,
            CliError::Numeric(_) => 2,
            CliError::Acceptance(_) => 3,
        }
    }
}

impl From<herald_core::Error> for CliError {
    fn from(e: herald_core::Error) -> Self {
        if e.is_numeric() {
            CliError::Numeric(e)
        } else {
            CliError::Validation(e.to_string())
        }
    }
}
