//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mach field must be strictly positive, node {index} is {value}")]
    NonPositiveMach { index: usize, value: f64 },

    #[error("grid needs at least 2 nodes, got {0}")]
    GridTooSmall(usize),

    #[error("invalid sampling range: low {low} is not below high {high}")]
    InvalidRange { low: f64, high: f64 },

    #[error("dataset is already standardized")]
    AlreadyStandardized,

    #[error("dataset is not standardized")]
    NotStandardized,

    #[error("standardization needs at least 2 rows, got {0}")]
    TooFewRows(usize),

    #[error("dimension mismatch: expected {expected} columns, got {actual}")]
    DimMismatch { expected: usize, actual: usize },

    #[error("no training data available")]
    EmptyTraining,

    #[error("point cloud splits into large components of sizes {0:?}; increase the pivot radius")]
    DisconnectedCloud(Vec<usize>),

    #[error("empty input")]
    EmptyInput,

    #[error("stretched curve is flat: the total |dy| along the curve is zero")]
    FlatCurve,

    #[error("index {index} is outside the decomposed range of {len} points")]
    OutOfRange { index: usize, len: usize },

    #[error("domain {domain} has {rows} training rows, need at least {min}")]
    UndersizedDomain { domain: usize, rows: usize, min: usize },

    #[error("training loss became non-finite at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },

    #[error("format error: {0}")]
    Format(String),

    #[error("linear algebra backend: {0}")]
    Backend(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
