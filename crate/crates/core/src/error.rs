//! Error type shared across the toolkit.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolarError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: malformed row: {reason}")]
    MalformedRow { line: usize, reason: String },

    #[error("line {line}: negative irradiance {value}")]
    NegativeIrradiance { line: usize, value: f64 },

    #[error("line {line}: duplicate timestamp {timestamp}")]
    DuplicateTimestamp { line: usize, timestamp: String },

    #[error("line {line}: non-increasing timestamp {timestamp}")]
    NonIncreasingTimestamp { line: usize, timestamp: String },

    #[error("gap of {gap_minutes} minutes after {timestamp} exceeds one missing sample")]
    GapTooLong { timestamp: String, gap_minutes: i64 },

    #[error("series too short: {len} samples, need at least 2")]
    SeriesTooShort { len: usize },

    #[error("empty time-of-day window")]
    EmptyWindow,

    #[error("window length is not a whole number of {step_minutes}-minute slots")]
    WindowNotAligned { step_minutes: u32 },

    #[error("no day in the series covers the requested window")]
    NoCompleteDay,

    #[error("state sequence too short: {len} states, need at least 2 for transitions")]
    SequenceTooShort { len: usize },

    #[error("empty count matrix: no transitions observed")]
    EmptyCounts,

    #[error("invalid thresholds: require 0 < lr < mr < max, got {lr}, {mr}, {max}")]
    InvalidThresholds { lr: f64, mr: f64, max: f64 },

    #[error("degenerate (all-zero) state distribution")]
    DegenerateDistribution,

    #[error("invalid degrees of freedom: {dof}")]
    InvalidDof { dof: u32 },

    #[error("significance must lie in (0, 1), got {value}")]
    InvalidSignificance { value: f64 },

    #[error("need at least 2 matrices for a stationarity check, got {n}")]
    TooFewMatrices { n: usize },

    #[error("invalid segmentation plan: {reason}")]
    InvalidPlan { reason: String },

    #[error("sequence does not cover the plan window: {reason}")]
    CoverageMismatch { reason: String },

    #[error("sequence length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("empty state sequence")]
    EmptySequence,

    #[error("invalid config: {reason}")]
    InvalidConfig { reason: String },

    #[error("invalid matrix file: {reason}")]
    InvalidMatrixFile { reason: String },
}

pub type Result<T> = std::result::Result<T, SolarError>;

impl SolarError {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        SolarError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 2 for missing/unreadable files,
    /// 3 for grid mismatches, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            SolarError::Io { .. } => 2,
            SolarError::LengthMismatch { .. } => 3,
            _ => 1,
        }
    }
}
