use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point is not in the required region: {0}")]
    OutOfDomain(String),

    #[error("{solver} did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("rejection sampler exceeded {cap} attempts ({accepted} accepted)")]
    AttemptCap { cap: u64, accepted: usize },

    #[error("non-finite state at step {step} (t = {time}), node {node}")]
    NonFinite { step: u64, time: f64, node: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("trajectory format error in {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("unsupported trajectory format version {found} in {path} (expected {expected})")]
    Version {
        path: PathBuf,
        found: u16,
        expected: u16,
    },

    #[error("truncated trajectory file {path}: needed {needed} bytes at offset {offset}")]
    Truncated {
        path: PathBuf,
        offset: u64,
        needed: usize,
    },

    #[error("I/O error on {path} at byte offset {offset}: {source}")]
    Io {
        path: PathBuf,
        offset: u64,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serde(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, offset: u64, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            offset,
            source,
        }
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
