use thiserror::Error;

use crate::metric::SpaceTag;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point belongs to space {found}, expected {expected}")]
    SpaceMismatch { expected: SpaceTag, found: SpaceTag },

    #[error("coordinates {coords:?} are outside {space}")]
    OutsideSpace { space: String, coords: Vec<f64> },

    #[error("arc-length parameter {s} outside [0, {length}]")]
    ParameterOutOfRange { s: f64, length: f64 },

    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("invalid game configuration: {0}")]
    InvalidConfig(String),

    #[error("{0}")]
    Usage(String),

    #[error("trace has no samples")]
    EmptyTrace,

    #[error("malformed trace file: {0}")]
    TraceFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
