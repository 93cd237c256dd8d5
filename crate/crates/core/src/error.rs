use thiserror::Error;

/// Errors raised by the engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parse error at {line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("arithmetic error: {0}")]
    Arithmetic(String),
    #[error("precision mismatch: {0}")]
    PrecisionMismatch(String),
    #[error("negative radicand")]
    NegativeRadicand,
    #[error("no square root modulo {0}")]
    NonResidue(String),
    #[error("square-root branch undetermined: {0}")]
    BranchUndetermined(String),
    #[error("interval Newton step not verified: {0}")]
    NotVerified(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }
}
