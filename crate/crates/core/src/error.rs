use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the term calculus, the text layer and the case pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid monomial: {0}")]
    InvalidMonomial(String),

    #[error("invalid label {0:?}")]
    InvalidLabel(String),

    #[error("label collision: {0}")]
    LabelCollision(String),

    #[error("syntax error at offset {position}: expected {expected}, found {found}")]
    Syntax {
        position: usize,
        expected: String,
        found: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("schema error: {0}")]
    Schema(String),

    /// A nested error annotated with the file and location it came from.
    #[error("{file}:{line}: {context}: {source}")]
    Located {
        file: String,
        line: usize,
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("monomial outside the relation universe: {0}")]
    MonomialOutsideUniverse(String),

    #[error("grading violation: {0}")]
    Grading(String),

    #[error("nullity mismatch: expected {expected}, found {found}")]
    NullityMismatch { expected: usize, found: usize },

    #[error("solution mismatch: {0}")]
    SolutionMismatch(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Input/parse/schema failures, as opposed to verification failures.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::NullityMismatch { .. } | Error::SolutionMismatch(_))
    }
}
