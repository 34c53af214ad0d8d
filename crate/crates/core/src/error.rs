use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no broadband bins")]
    NoBroadbandBins,

    #[error("tonal frequency {0} Hz outside the frequency axis")]
    TonalOutOfSpan(f64),

    #[error("track crosses receiver: range {range_m} m at snapshot {index}")]
    TrackCrossesReceiver { index: usize, range_m: f64 },

    #[error("range axis is not strictly monotone")]
    NonMonotoneAxis,

    #[error("window too short for search grid")]
    WindowTooShort,

    #[error("invalid cell inside striation set at striation {striation}, bin {bin}")]
    InvalidCell { striation: usize, bin: usize },

    #[error("insufficient ratio samples at bin {bin}: {count}")]
    InsufficientRatioSamples { bin: usize, count: usize },

    #[error("non-positive scale ratio estimate at bin {bin}: {value}")]
    BadScaleRatio { bin: usize, value: f64 },

    #[error("degenerate striation")]
    DegenerateStriation,

    #[error("all hypotheses rejected")]
    AllHypothesesRejected,

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("unsupported format version {0}")]
    Version(u32),

    #[error("truncated payload: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("ground truth: {0}")]
    GroundTruth(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors that reject a single hypothesis rather than the whole
    /// search.
    pub fn is_hypothesis_rejection(&self) -> bool {
        matches!(
            self,
            Error::DegenerateStriation
                | Error::BadScaleRatio { .. }
                | Error::InsufficientRatioSamples { .. }
        )
    }
}
