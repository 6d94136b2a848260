//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid partition rows {0:?}: rows must be positive and weakly decreasing")]
    InvalidPartition(Vec<usize>),

    #[error("cell ({row},{col}) is not addable to {partition}")]
    NotAddable {
        row: usize,
        col: usize,
        partition: String,
    },

    #[error("cell ({row},{col}) is not removable from {partition}")]
    NotRemovable {
        row: usize,
        col: usize,
        partition: String,
    },

    #[error("index {index} out of range for {what} (valid range {range})")]
    IndexOutOfRange {
        index: usize,
        what: &'static str,
        range: String,
    },

    #[error("unknown vertex {vertex} at level {level}")]
    UnknownVertex { vertex: String, level: usize },

    #[error("invalid Yamanouchi word at level {level}: {reason}")]
    InvalidWord { level: usize, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension guard exceeded: required {required}, guard {guard}")]
    GuardExceeded { required: usize, guard: usize },

    #[error("solver failed: {0}")]
    Solver(String),

    #[error("linear algebra backend error: {0}")]
    LinAlg(String),
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::LinAlg(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
