use std::path::PathBuf;

use thiserror::Error;

use crate::lexicon::ValidationReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("missing input file {0}")]
    MissingFile(PathBuf),

    #[error("{file}: malformed row {row}: {message}")]
    MalformedRow {
        file: String,
        row: u64,
        message: String,
    },

    #[error("{file}: row {row}: unknown {kind} '{name}'")]
    UnknownReference {
        file: String,
        row: u64,
        kind: &'static str,
        name: String,
    },

    #[error("{file}: row {row}: duplicate key {key}")]
    DuplicateKey { file: String, row: u64, key: String },

    #[error("missing typicality cell for category '{category}', feature '{feature}'")]
    MissingCell { category: String, feature: String },

    #[error("ratings for category '{0}' sum to zero")]
    ZeroRowSum(String),

    #[error("rating {value} for ({category}, {feature}) outside the 1-7 scale")]
    RatingOutOfRange {
        category: String,
        feature: String,
        value: f64,
    },

    #[error("invalid feature vocabulary: {0}")]
    InvalidVocab(String),

    #[error("dataset failed validation:\n{0}")]
    Validation(ValidationReport),

    #[error("unknown category '{0}'")]
    UnknownCategory(String),

    #[error("unknown feature '{0}'")]
    UnknownFeature(String),

    #[error("degenerate utility: typicality of feature {feature} for '{category}' is {value}")]
    DegenerateUtility {
        category: String,
        feature: usize,
        value: f64,
    },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("empty utterance set")]
    EmptyUtterances,

    #[error("utterance set does not contain vehicle '{0}'")]
    VehicleNotUttered(String),

    #[error("normalization mass is zero")]
    ZeroMass,

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("zero variance in {0}")]
    ZeroVariance(&'static str),

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of the filesystem rather than of the data.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. } | Error::MissingFile(_))
    }
}
