use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} out of domain: {value}")]
    Domain { what: &'static str, value: f64 },

    #[error("no stationary range distribution for epsilon = {epsilon} (requires epsilon < 0.5)")]
    NoStationaryDistribution { epsilon: f64 },

    #[error("quantizer input {value} outside (-{half_range}, {half_range})")]
    RangeViolation { value: f64, half_range: f64 },

    #[error("scaling factor {scale} outside the admissible interval ({low}, {high})")]
    InvalidScaling { scale: f64, low: f64, high: f64 },

    #[error("cell index {index} invalid for a {bits}-bit quantizer")]
    InvalidIndex { index: u128, bits: u32 },

    #[error("{bits}-bit quantizer cannot be indexed with 128-bit cell indices")]
    ResolutionTooFine { bits: u32 },

    #[error("quantizer range index exceeded the cap of {cap}")]
    RangeIndexOverflow { cap: u32 },

    #[error("no zooming quantizer exists for n = {n}, R = {rate}")]
    NoQuantizer { n: u32, rate: f64 },

    #[error("no feasible (n, R) cell in the search grid")]
    EmptyRegion,

    #[error("closed loop diverged at block {block}: {reason}")]
    Diverged { block: u64, reason: String },

    #[error("trial {trial} (seed {seed:#018x}) aborted: {source}")]
    TrialFailed {
        trial: usize,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(what: &'static str, value: f64) -> Self {
        Error::Domain { what, value }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::EmptyRegion => 2,
            Error::Config(_)
            | Error::Domain { .. }
            | Error::InvalidScaling { .. }
            | Error::NoQuantizer { .. } => 3,
            Error::Io { .. } => 4,
            _ => 1,
        }
    }
}
