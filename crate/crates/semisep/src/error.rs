//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by model construction, estimation and the CLI front end.
#[derive(Debug, Error)]
pub enum Error {
    /// Shapes of inputs do not line up (wrong row count, odd sample length, ...).
    #[error("dimension error: {0}")]
    Dimension(String),

    /// A scalar parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    Invalid(String),

    /// A numerical operation failed (non-positive-definite covariance,
    /// singular system, rank deficiency).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Structured data violates an invariant it was declared to satisfy.
    #[error("validation error: {0}")]
    Validation(String),

    /// A configuration document is malformed or semantically inconsistent.
    #[error("config error: {0}")]
    Config(String),

    /// A data file is missing, empty or malformed.
    #[error("data error: {0}")]
    Data(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
