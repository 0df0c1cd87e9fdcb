use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("calibration set is empty")]
    EmptyCalibrationSet,

    #[error("objective evaluated to a non-finite value at {0:?}")]
    NonFiniteObjective([f64; 3]),

    #[error("input is empty")]
    EmptyInput,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("leave-one-out needs at least 3 raters, found {0}")]
    TooFewRaters(usize),

    #[error("records from different items in one tally: {first:?} and {other:?}")]
    MixedItems { first: String, other: String },

    #[error("item {0:?} has no votes for one presentation order")]
    MissingOrder(String),

    #[error("item {0:?} has a vote without a confidence score")]
    MissingConfidence(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("item {item:?} has two labels from rater {rater:?}")]
    DuplicateLabel { item: String, rater: Option<String> },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::NonFiniteObjective(_))
    }
}
