use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("value at index {index} is not finite ({value})")]
    NonFinite { index: usize, value: f64 },

    #[error("threads per block must be a non-zero power of two, got {0}")]
    InvalidThreadsPerBlock(usize),

    #[error("number of blocks must be at least 1")]
    InvalidBlockCount,

    #[error("invalid range: lo ({lo}) must be below hi ({hi})")]
    InvalidRange { lo: f64, hi: f64 },

    #[error("standard deviation must be positive and finite, got {0}")]
    InvalidSigma(f64),

    #[error("reference value is zero")]
    ZeroReference,

    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch { left: Vec<usize>, right: Vec<usize> },

    #[error("index {index} at position {position} is out of range for extent {extent}")]
    IndexOutOfRange {
        position: usize,
        index: usize,
        extent: usize,
    },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("empty sample set")]
    EmptySamples,

    #[error("degenerate sample set: {0}")]
    Degenerate(&'static str),

    #[error("power-law data point {index} is not positive")]
    NonPositive { index: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed container: {0}")]
    Format(String),
}
