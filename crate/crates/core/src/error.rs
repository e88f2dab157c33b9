use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("i/o error")]
    Stream(#[from] io::Error),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("duplicate document id {0:?}")]
    DuplicateId(String),

    #[error("invalid document id {0:?}: ids must be non-empty and contain no whitespace")]
    InvalidDocId(String),

    #[error("corpus contains no labeled documents")]
    NoLabeledDocuments,

    #[error("unsupported file version {found} (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("query has no keywords after stopword removal")]
    EmptyQuery,

    #[error("empty training set")]
    EmptyTrainingSet,

    #[error("document {0:?} has no category assignment")]
    MissingAssignment(String),

    #[error("corpus statistics inconsistent: {0}")]
    Inconsistent(String),

    #[error("cutoff must be at least 1")]
    InvalidCutoff,

    #[error("invalid gender {0:?}: expected female, male or unspecified")]
    InvalidGender(String),

    #[error("click journal write failed")]
    Journal(#[source] io::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, message: impl ToString) -> Self {
        Error::Parse {
            line,
            message: message.to_string(),
        }
    }
}
