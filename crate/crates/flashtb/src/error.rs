use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error in {file} line {line}: {message}")]
    Parse {
        file: String,
        line: usize,
        message: String,
    },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("footpath component around stop {stop} exceeds closure limit {limit}")]
    FootpathBlowup { stop: String, limit: usize },

    #[error("unknown stop: {0}")]
    UnknownStop(String),

    #[error("bad query: {0}")]
    BadQuery(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("bad file format: {0}")]
    Format(String),

    #[error("artifact mismatch: {0}")]
    ArtifactMismatch(String),

    #[error("oracle budget exceeded ({0} states)")]
    OracleBudget(usize),

    #[error("{0}")]
    Other(String),
}
