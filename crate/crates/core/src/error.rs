use std::path::PathBuf;

/// Errors raised by every fallible operation in this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("{op} needs a series of length at least {needed}, got {got}")]
    TooShort {
        op: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("band radius {band} admits no path between lengths {left} and {right}")]
    InfeasibleBand {
        band: usize,
        left: usize,
        right: usize,
    },

    #[error("path enumeration is limited to length {limit}, got {left}x{right}")]
    EnumerationGuard {
        limit: usize,
        left: usize,
        right: usize,
    },

    #[error("no records")]
    NoRecords,

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("matrix has zero spectral radius")]
    ZeroSpectralRadius,

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("generator diverged {attempts} times in a row")]
    Diverged { attempts: usize },

    #[error("pair ({row}, {col}): {source}")]
    Pair {
        row: usize,
        col: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("item {index}: {source}")]
    Item {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn at_pair(self, row: usize, col: usize) -> Self {
        Error::Pair {
            row,
            col,
            source: Box::new(self),
        }
    }

    pub(crate) fn at_item(self, index: usize) -> Self {
        Error::Item {
            index,
            source: Box::new(self),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
