use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Non-finite samples or otherwise malformed numeric input.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// Lengths or shapes that do not fit together.
    #[error("size error: {0}")]
    Size(String),
    #[error("parameter error: {0}")]
    Parameter(String),
    /// A band policy selected no bins at all.
    #[error("empty band: {0}")]
    EmptyBand(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("missing value at line {line}, column '{column}'")]
    MissingValue { line: u64, column: String },
    #[error("data error: {0}")]
    Data(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
