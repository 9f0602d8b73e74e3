use thiserror::Error;

/// Errors raised by the geometry, bound, transport, and audit routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("index {index} out of range for {count} points")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("numeric failure: {message} (achieved tolerance {achieved:e})")]
    NumericFailure { message: String, achieved: f64 },

    #[error("problem size {size} exceeds capacity {limit}: {context}")]
    Capacity {
        size: usize,
        limit: usize,
        context: String,
    },

    #[error("query {index}: {source}")]
    AtQuery {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("rank deficient: requested {requested} components, data has rank {achieved}")]
    RankDeficient { requested: usize, achieved: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
