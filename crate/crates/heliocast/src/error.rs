//! Error type shared across the pipeline.
//!
//! Every stage reports failures through [`Error`] so CLI exit codes and
//! stage-tagged messages can be derived in one place.

use chrono::{NaiveDate, NaiveDateTime};
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    // --- ingest ---
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("duplicate timestamp {0}")]
    DuplicateTimestamp(NaiveDateTime),
    #[error("non-hourly cadence at {0}: timestamps must lie on a 1-hour grid")]
    Cadence(NaiveDateTime),
    #[error("data quality: {0}")]
    DataQuality(String),
    #[error("boundary error: {0}")]
    Boundary(String),
    #[error("requested window [{start} + {days} days] outside available data")]
    WindowOutOfRange { start: NaiveDate, days: usize },
    #[error("invalid site metadata: {0}")]
    InvalidSite(String),
    #[error("invalid series: {0}")]
    InvalidSeries(String),

    // --- solar geometry / preprocess ---
    #[error("no daylight mask available for {0}")]
    MissingMask(NaiveDate),
    #[error("series misaligned at index {0}: timestamps differ")]
    Misaligned(usize),
    #[error("{stage}: zero-range input (series is constant)")]
    ZeroRange { stage: &'static str },
    #[error("trend fit underdetermined: {samples} samples for degree {degree}")]
    Underdetermined { samples: usize, degree: usize },
    #[error("{stage}: regression matrix is rank-deficient or ill-conditioned{hint}")]
    Conditioning { stage: &'static str, hint: String },
    #[error("{stage}: series too short ({len} samples, need at least {min})")]
    TooShort {
        stage: &'static str,
        len: usize,
        min: usize,
    },
    #[error("series is nonstationary: ADF statistic {statistic:.4} above critical value {critical:.4}")]
    Nonstationary { statistic: f64, critical: f64 },

    // --- narnn / armax ---
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("training diverged at epoch {epoch}: loss became non-finite")]
    TrainingDiverged { epoch: usize },
    #[error("zero-variance target: coefficient of determination is undefined")]
    ZeroVarianceTarget,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("order selection failed for every candidate: {0}")]
    SelectionFailed(String),
    #[error("degenerate model: {0}")]
    Degenerate(String),

    // --- eval / cli ---
    #[error("zero-mean actual series: NRMSE is undefined")]
    ZeroMeanActual,
    #[error("reports cover different target dates; cannot compare")]
    MismatchedDates,
    #[error("config error: {0}")]
    Config(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for this failure: 1 usage, 2 data, 3 numerical.
    pub fn exit_code(&self) -> i32 {
        use Error::*;
        match self {
            InvalidConfig(_) | Config(_) => 1,
            Parse { .. }
            | DuplicateTimestamp(_)
            | Cadence(_)
            | DataQuality(_)
            | Boundary(_)
            | WindowOutOfRange { .. }
            | InvalidSite(_)
            | InvalidSeries(_)
            | MissingMask(_)
            | Misaligned(_)
            | Io { .. } => 2,
            _ => 3,
        }
    }
}
