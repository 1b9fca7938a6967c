use thiserror::Error;

/// Errors raised by the signal chain, the recovery algorithm and the harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid system dimensions: {0}")]
    InvalidDims(String),

    #[error("unsupported RU format: {0} subcarriers (allowed: 1, 3, 6, 12)")]
    UnsupportedRuFormat(usize),

    #[error("start index {start} outside 0..{frame_len}")]
    StartOutOfRange { start: usize, frame_len: usize },

    #[error("noise variance must be non-negative, got {0}")]
    NegativeNoiseVariance(f64),

    #[error("channel generator degenerate: {attempts} consecutive near-singular draws")]
    ChannelDegenerate { attempts: usize },

    #[error("singular channel bin {index}: |lambda| = {magnitude:e} below floor {floor:e}")]
    SingularChannelBin {
        index: usize,
        magnitude: f64,
        floor: f64,
    },

    #[error("observation matrix column {0} has zero norm")]
    ZeroColumn(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid recovery configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid experiment spec: {0}")]
    InvalidSpec(String),

    #[error("i/o failure on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv failure: {0}")]
    Csv(#[from] csv::Error),

    #[error("config parse failure: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
