//! Error types shared across the crate.

use std::path::PathBuf;
use thiserror::Error;

/// Coarse error class, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Invalid parameters, grid geometry mismatches, malformed configuration.
    Config,
    /// File system and format errors.
    Io,
    /// Metric computation errors (e.g. empty clouds).
    Eval,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("voxel index ({0}, {1}, {2}) out of bounds for grid of dims ({3}, {4}, {5})")]
    OutOfBounds(usize, usize, usize, usize, usize, usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("grid geometry mismatch: {0}")]
    GeometryMismatch(String),

    #[error("bad magic in {path}: expected \"VXGD\", found {found:?}")]
    BadMagic { path: PathBuf, found: [u8; 4] },

    #[error("unsupported grid file version {found} in {path} (expected {expected})")]
    UnsupportedVersion {
        path: PathBuf,
        found: u16,
        expected: u16,
    },

    #[error("unexpected channel count {found} in {path} (expected {expected})")]
    ChannelMismatch {
        path: PathBuf,
        found: u16,
        expected: u16,
    },

    #[error("truncated payload in {path}: header declares {expected_bytes} bytes, file holds {found_bytes}")]
    TruncatedPayload {
        path: PathBuf,
        expected_bytes: u64,
        found_bytes: u64,
    },

    #[error("malformed PLY in {path}: {reason}")]
    MalformedPly { path: PathBuf, reason: String },

    #[error("evaluation error: {0}")]
    Eval(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed JSON in {path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
}

impl Error {
    /// Classify for exit-code mapping: configuration vs. I/O vs. evaluation.
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::OutOfBounds(..)
            | Error::InvalidParameter(_)
            | Error::InvalidConfig(_)
            | Error::GeometryMismatch(_) => ErrorClass::Config,
            Error::BadMagic { .. }
            | Error::UnsupportedVersion { .. }
            | Error::ChannelMismatch { .. }
            | Error::TruncatedPayload { .. }
            | Error::MalformedPly { .. }
            | Error::Io(_)
            | Error::Json { .. } => ErrorClass::Io,
            Error::Eval(_) => ErrorClass::Eval,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
