//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("length mismatch: expected {expected} bits, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("channel {channel} out of range (device has {channels})")]
    ChannelOutOfRange { channel: u32, channels: u32 },

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("non-finite sample encountered")]
    NonFiniteSample,

    #[error("quantizer boundaries are not strictly increasing (degenerate calibration data)")]
    DegenerateQuantizer,

    #[error("no BCH code of length 255 corrects {0} errors")]
    UnachievableCorrection(usize),

    #[error("BCH reconstruction failed (decoder failure)")]
    ReconstructionFailed,

    #[error("calibration failed: {0}")]
    CalibrationFailed(String),

    #[error("key space exhausted: need {needed} unused blocks, {available} left")]
    KeySpaceExhausted { needed: usize, available: usize },

    #[error("unknown block index {0}")]
    UnknownBlockIndex(usize),

    #[error("block {0} already consumed")]
    BlockAlreadyUsed(usize),

    #[error("zero variance: binomial fit undefined")]
    ZeroVariance,

    #[error("empty input")]
    EmptyInput,

    #[error("input of {got} bits is too short for context depth {depth}")]
    InputTooShort { depth: usize, got: usize },

    #[error("malformed {kind}: {detail}")]
    Format { kind: &'static str, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn format(kind: &'static str, detail: impl Into<String>) -> Self {
        Error::Format {
            kind,
            detail: detail.into(),
        }
    }
}
