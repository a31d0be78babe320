use thiserror::Error;

/// Errors produced by ingestion, estimation and reporting.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: u64, msg: String },

    #[error("unknown answer token '{token}' at line {line}")]
    UnknownAnswer { token: String, line: u64 },

    #[error("duplicate response for task '{task}' by worker '{worker}'")]
    DuplicateResponse { task: String, worker: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("inconsistent inputs: {0}")]
    Consistency(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
