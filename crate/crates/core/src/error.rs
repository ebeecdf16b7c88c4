use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("well field: {0}")]
    Field(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("times must be strictly increasing: t[{index}] = {value} does not exceed t[{prev}] = {prev_value}", prev = .index - 1)]
    NonMonotoneTime { index: usize, value: f64, prev_value: f64 },

    #[error("non-finite {what} at (row {row}, col {col})")]
    NonFinite { what: &'static str, row: usize, col: usize },

    #[error("negative injection rate {value} at (row {row}, col {col})")]
    NegativeInjection { row: usize, col: usize, value: f64 },

    #[error("split index {index} out of range for a {n_steps}-step series (need 0 < index < n_steps)")]
    SplitOutOfRange { index: usize, n_steps: usize },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("time grid is not uniform: step {index} has dt = {dt}, expected {expected}")]
    NonUniformGrid { index: usize, dt: f64, expected: f64 },

    #[error("{}: line {line}: {msg}", .path.display())]
    Csv { path: PathBuf, line: u64, msg: String },

    #[error("{}: schema: {msg}", .path.display())]
    Schema { path: PathBuf, msg: String },

    #[error("{}: no data", .0.display())]
    NoData(PathBuf),

    #[error("non-finite loss at iteration {iteration}")]
    Divergence { iteration: usize },

    #[error("non-finite training loss at epoch {epoch}")]
    RnnDivergence { epoch: usize },

    #[error("all {0} starts failed to produce a finite loss")]
    AllStartsFailed(usize),

    #[error("unsupported model file version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },

    #[error("model file: {0}")]
    Model(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error("{}: {source}", .path.display())]
    File { path: PathBuf, source: std::io::Error },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn file(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
        move |source| Error::File {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Process exit code for the CLI: 1 usage, 2 data, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::SplitOutOfRange { .. } => 1,
            Error::Divergence { .. } | Error::RnnDivergence { .. } | Error::AllStartsFailed(_) => 3,
            _ => 2,
        }
    }
}
