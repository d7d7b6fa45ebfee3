use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed wav: {0}")]
    Format(String),
    #[error("unsupported wav format: {0}")]
    UnsupportedFormat(String),
    #[error("signal shorter than one frame ({len} < {frame_len})")]
    EmptyInput { len: usize, frame_len: usize },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("degenerate signal: {0}")]
    DegenerateSignal(String),
    #[error("no decision: {0}")]
    NoDecision(String),
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: value {value} outside [0, 1]")]
    Range { line: usize, value: f64 },
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn geometry(msg: impl Into<String>) -> Self {
        Error::Geometry(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::DegenerateSignal(msg.into())
    }
}
