use std::path::PathBuf;

use crate::volume::{Dims, Kind};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed header: {0}")]
    Header(String),

    #[error("data length mismatch: expected {expected} values, found {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("{kind} volume has invalid value {value} at index {index}")]
    KindViolation {
        kind: Kind,
        index: usize,
        value: f32,
    },

    #[error("invalid spacing ({0}, {1}, {2}): components must be finite and > 0")]
    InvalidSpacing(f64, f64, f64),

    #[error("invalid dims {0:?}: every axis must be >= 1")]
    InvalidDims([usize; 3]),

    #[error("shape mismatch: {left} vs {right}")]
    DimsMismatch { left: Dims, right: Dims },

    #[error("spacing mismatch between volumes")]
    SpacingMismatch,

    #[error("expected a {expected} volume, got {actual}")]
    WrongKind {
        expected: &'static str,
        actual: Kind,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("mask has no background voxel; distance transform is unbounded")]
    NoBackground,

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
