//! Crate-wide error type.

use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("wav format error: {0}")]
    WavFormat(String),

    #[error("unsupported channel count {0}: input must be mono")]
    UnsupportedChannels(u16),

    #[error("unsupported codec: {0} (expected 16-bit integer PCM)")]
    UnsupportedCodec(String),

    #[error("recording is silent: nothing left after trimming")]
    EmptyAfterTrim,

    #[error("signal too short: {0}")]
    TooShort(String),

    #[error("no voiced frames in recording")]
    Unvoiced,

    #[error("too few cycles: found {found}, need {needed}")]
    InsufficientCycles { found: usize, needed: usize },

    #[error("class {0} has too few instances")]
    InsufficientClass(String),

    #[error("out of bounds: {0}")]
    Bounds(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("coordinate descent did not converge at lambda = {lambda}")]
    Convergence { lambda: f64 },

    #[error("training data contains a single class")]
    DegenerateTraining,

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("undefined correlation: zero-variance input")]
    UndefinedCorrelation,

    #[error("degenerate signal: {0}")]
    DegenerateSignal(String),

    #[error("selection protocol error: {0}")]
    Protocol(String),

    #[error("invalid synthesis spec: {0}")]
    InvalidSpec(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 2 for data problems, 3 for numerical
    /// failures. Usage errors (exit 1) are handled by the argument parser.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Convergence { .. }
            | Error::DegenerateTraining
            | Error::DegenerateSignal(_)
            | Error::UndefinedMetric(_)
            | Error::UndefinedCorrelation => 3,
            _ => 2,
        }
    }
}
