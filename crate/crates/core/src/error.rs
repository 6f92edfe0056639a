use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed tag {tag:?}: {reason}")]
    MalformedTag { tag: String, reason: String },

    #[error("malformed MWE template {template:?}: {reason}")]
    MalformedTemplate { template: String, reason: String },

    #[error("duplicate category label {0}")]
    DuplicateLabel(String),

    #[error("category label {0} has no title")]
    MissingTitle(String),

    #[error("gloss for {0} has no tokens")]
    EmptyGloss(String),

    #[error("index {index} out of range for sequence of length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("training dataset is empty")]
    EmptyDataset,

    #[error("tag frequency table is empty")]
    EmptyTable,

    #[error("not enough labels to draw {needed} distinct negatives (available: {available})")]
    InsufficientLabels { needed: usize, available: usize },

    #[error("corpus contains no labelled tokens")]
    EmptyCorpus,

    #[error("gold and predictions are misaligned at position {position}: gold token {gold}, predicted token {predicted}")]
    Alignment {
        position: usize,
        gold: usize,
        predicted: usize,
    },

    #[error("invalid training example: {0}")]
    InvalidExample(String),

    #[error("unknown category label {0}")]
    UnknownLabel(String),

    #[error("invalid checkpoint: {0}")]
    Checkpoint(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{}:{line}: {source}", path.display())]
    AtLine {
        path: PathBuf,
        line: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    RawIo(#[from] io::Error),
}

impl Error {
    pub(crate) fn at_line(path: impl Into<PathBuf>, line: usize, source: Error) -> Self {
        Error::AtLine {
            path: path.into(),
            line,
            source: Box::new(source),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True when the error was caused by bad user input rather than a bug or
    /// an environment failure. The command-line tool maps these to exit code 2.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::AtLine { source, .. } => source.is_input_error(),
            Error::Io { .. } | Error::RawIo(_) => false,
            _ => true,
        }
    }
}
