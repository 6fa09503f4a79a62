//! Error type shared across the crate.

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReldError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed frame file {path}: {reason}")]
    MalformedFrame { path: PathBuf, reason: String },

    #[error("no frames found in {0}")]
    EmptyDirectory(PathBuf),

    #[error("frame dimension mismatch: expected {expected_height}x{expected_width}, {path} is {height}x{width}")]
    DimensionMismatch {
        path: PathBuf,
        expected_height: usize,
        expected_width: usize,
        height: usize,
        width: usize,
    },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular value decomposition failed to converge")]
    SvdFailure,

    #[error("rank-deficient least-squares system on support of size {support_len} (condition estimate {condition:.3e})")]
    RankDeficient { support_len: usize, condition: f64 },

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("external denoiser failed: {0}")]
    ExternalDenoiser(String),
}

pub type Result<T> = std::result::Result<T, ReldError>;
