use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("length mismatch: expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid waypoint set: {0}")]
    InvalidWaypoints(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate leg: start and end waypoints coincide")]
    DegenerateLeg,

    #[error("dynamics diverged on leg {leg} after {sample} samples")]
    DynamicsDiverged { leg: usize, sample: usize },

    #[error("point ({0}, {1}) does not weakly dominate the reference point")]
    ReferenceNotDominated(f64, f64),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("malformed file {path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
