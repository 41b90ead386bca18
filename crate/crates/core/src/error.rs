use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("factor {factor}: {axiom}")]
    Axiom { factor: usize, axiom: String },

    #[error("{0}")]
    InvalidInput(String),

    #[error("{what} exceeded cap {cap}")]
    CapExceeded { what: &'static str, cap: usize },

    #[error("verification failure: {0}")]
    Verification(String),
}

pub type Result<T> = std::result::Result<T, Error>;
