use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("candidate set too large for exhaustive search: {candidates} edges (cap {cap})")]
    CandidateCapExceeded { candidates: usize, cap: usize },

    #[error("instance too large for brute-force oracle: {0}")]
    OracleCapExceeded(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("deadline exceeded")]
    Timeout,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
