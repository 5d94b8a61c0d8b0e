use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {0}")]
    MissingFile(PathBuf),

    #[error("{path}: expected mono audio, found {channels} channels")]
    MultiChannel { path: PathBuf, channels: u16 },

    #[error("{path}: unsupported WAV encoding ({detail})")]
    UnsupportedEncoding { path: PathBuf, detail: String },

    #[error("{path}: malformed WAV ({detail})")]
    MalformedWav { path: PathBuf, detail: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("clip is empty")]
    EmptyClip,

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("mismatch: {0}")]
    Mismatch(String),

    #[error("{0} is silent (zero RMS)")]
    Silent(&'static str),

    #[error("correlation undefined: constant sequence")]
    UndefinedCorrelation,

    #[error("transform size {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("clip of {len} samples is shorter than one window of {window}")]
    ClipTooShort { len: usize, window: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("input {rows}x{cols} collapses below 1x1 after {blocks} stride-2 blocks")]
    SpatialCollapse {
        rows: usize,
        cols: usize,
        blocks: usize,
    },

    #[error("non-finite gradient, step skipped")]
    NonFiniteGradient,

    #[error("training diverged: {0}")]
    Divergence(String),

    #[error("batch with a single class cannot form triplets")]
    SingleClass,

    #[error("batch stratification unsatisfiable: {0}")]
    Stratification(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("k = {k} exceeds the {available} available references")]
    KTooLarge { k: usize, available: usize },

    #[error("negative SNR ratio {0}")]
    NegativeRatio(f64),

    #[error("perplexity {perplexity} infeasible for {points} points")]
    Perplexity { perplexity: f64, points: usize },

    #[error("configuration: {0}")]
    Config(String),

    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the command-line front end: 1 usage, 2 data,
    /// 3 numeric failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter(_) | Error::Config(_) => 1,
            Error::UndefinedCorrelation
            | Error::NonFiniteGradient
            | Error::Divergence(_)
            | Error::Perplexity { .. } => 3,
            _ => 2,
        }
    }
}
