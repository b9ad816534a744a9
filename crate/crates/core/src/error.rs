use std::path::PathBuf;

use thiserror::Error;

use crate::corpus::Label;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed diff at line {line_no}: {reason}")]
    MalformedDiff { line_no: usize, reason: String },

    #[error("need at least 10 samples to split, got {0}")]
    TooFewSamples(usize),

    #[error("i/o failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("schema violation at line {line_no}: {reason}")]
    SchemaViolation { line_no: usize, reason: String },

    #[error("not enough {label:?} samples: requested {requested}, available {available}")]
    Insufficient {
        label: Label,
        requested: usize,
        available: usize,
    },

    #[error("training corpus is empty")]
    EmptyCorpus,

    #[error("no external vector for text hash {0}")]
    MissingExternalVector(String),

    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },

    #[error("training diverged at batch {batch} (non-finite loss)")]
    Diverged {
        batch: usize,
        last_checkpoint: Box<crate::model::Model>,
    },

    #[error("predictions ({predictions}) and labels ({labels}) differ in length")]
    LengthMismatch { predictions: usize, labels: usize },

    #[error("cannot compute metrics over zero samples")]
    EmptyEvaluation,

    #[error("`git` is not available on PATH")]
    GitUnavailable,

    #[error("{0} is not a git repository")]
    NotARepository(PathBuf),

    #[error("git failed: {0}")]
    Git(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
