use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A layout or run configuration cannot be realised.
    #[error("configuration error: {0}")]
    Config(String),

    /// One or more invariants of a value were violated.
    #[error("validation error: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },

    /// A document parsed but describes an invalid manifest.
    #[error("semantic error: {0}")]
    Semantic(String),

    #[error("computation error: {0}")]
    Computation(String),

    /// A CSV input violated its schema.
    #[error("schema error at line {line}: {message}")]
    Schema { line: u64, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
