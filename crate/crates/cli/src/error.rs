use bergman_lab::LabError;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Lab(#[from] LabError),
    #[error("config: {0}")]
    Config(String),
}

pub type CliResult<T> = Result<T, CliError>;

/// Body of the structured error report printed on failure.
#[derive(Debug, Serialize)]
pub struct ErrorReport<'a> {
    pub status: &'static str,
    pub command: &'a str,
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Lab(e) => e.kind(),
            CliError::Config(_) => "config",
        }
    }

    pub fn report<'a>(&self, command: &'a str) -> ErrorReport<'a> {
        ErrorReport { status: "error", command, kind: self.kind(), message: self.to_string() }
    }
}
