use thiserror::Error;

/// Every failure the library reports.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("point outside the domain: {0}")]
    Domain(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("mismatch: {0}")]
    Mismatch(String),
    #[error("truncation certificate failed: {0}")]
    Truncation(String),
    #[error("divergent integral: {0}")]
    Divergent(String),
    #[error("parse error at offset {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl LabError {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        LabError::InvalidParameter(msg.into())
    }

    pub(crate) fn mismatch(msg: impl Into<String>) -> Self {
        LabError::Mismatch(msg.into())
    }

    /// Short machine-readable tag used in structured error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            LabError::Domain(_) => "domain",
            LabError::InvalidParameter(_) => "invalid_parameter",
            LabError::Mismatch(_) => "mismatch",
            LabError::Truncation(_) => "truncation",
            LabError::Divergent(_) => "divergent",
            LabError::Parse { .. } => "parse",
            LabError::Json(_) => "json",
            LabError::Io(_) => "io",
            LabError::Csv(_) => "csv",
        }
    }
}

pub type Result<T, E = LabError> = std::result::Result<T, E>;
