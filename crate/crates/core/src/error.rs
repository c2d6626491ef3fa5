//! Crate-wide error type.
//!
//! Every fallible operation in this crate returns [`Error`]. The variants are
//! deliberately fine-grained so that callers (in particular the report layer
//! and the CLI) can distinguish data problems from configuration mistakes and
//! from internal numerical failures without string matching.

use std::path::PathBuf;

use chrono::NaiveDate;
use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification of an [`Error`], used to map failures onto process
/// exit codes (data = 1, configuration = 2, numeric = 3).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    /// The input data violates a precondition: too short, non-positive,
    /// tied, degenerate, unparseable, unreadable.
    Data,
    /// The caller asked for something unsupported: a bad significance level,
    /// an unknown window label, invalid parameters.
    Config,
    /// An internal numerical procedure failed (quadrature did not converge,
    /// a non-finite value appeared where one must not).
    Numeric,
}

#[derive(Debug, Error)]
pub enum Error {
    /// A sample is shorter than an operation requires.
    #[error("{what}: need at least {required} values, got {actual}")]
    InsufficientData {
        what: &'static str,
        required: usize,
        actual: usize,
    },

    /// A series value is non-positive or non-finite (logarithms must exist).
    #[error("value {value} at index {index} is invalid: series values must be strictly positive and finite")]
    InvalidValue { index: usize, value: f64 },

    /// Series dates are not strictly increasing.
    #[error("date {date} at index {index} does not come strictly after {prev}")]
    UnorderedDates {
        index: usize,
        date: NaiveDate,
        prev: NaiveDate,
    },

    /// A sample is too degenerate for the requested statistic (zero spread,
    /// tied order statistics, no usable blocks, ...).
    #[error("degenerate sample: {reason}")]
    DegenerateSample { reason: String },

    /// Two adjacent values are exactly equal, which the extrema-based test
    /// rules out (it presumes draws from a continuous distribution).
    #[error("adjacent equal values at indices {index} and {}", index + 1)]
    AdjacentTie { index: usize },

    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {reason}")]
    Domain { reason: String },

    /// A moment vector cannot be matched by any NIG distribution: the
    /// inversion requires 3k > 5s².
    #[error("moments not NIG-feasible: need 3k > 5s², got 3k = {} and 5s² = {} (s = {s}, k = {k})", 3.0 * k, 5.0 * s * s)]
    InfeasibleMoments { s: f64, k: f64 },

    /// Skewness and excess kurtosis vanish together: the NIG shape parameter
    /// diverges and the fit degenerates into a plain Gaussian.
    #[error("sample is at the Gaussian limit (s = {s}, k = {k}): no finite NIG parameters exist")]
    GaussianLimit { s: f64, k: f64 },

    /// The caller's configuration is unsupported or inconsistent.
    #[error("configuration error: {reason}")]
    Config { reason: String },

    /// An internal numerical procedure failed; the message carries
    /// diagnostics (where, how far it got, what the best estimate was).
    #[error("numeric error: {reason}")]
    Numeric { reason: String },

    /// A data file could not be parsed; `line` is 1-based.
    #[error("{}:{line}: {reason}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    /// A data file carries a non-positive or non-finite value.
    #[error("{}:{line}: value {value} must be strictly positive and finite", path.display())]
    NonPositiveValue {
        path: PathBuf,
        line: usize,
        value: f64,
    },

    /// A data file repeats a date.
    #[error("{}:{line}: duplicate date {date}", path.display())]
    DuplicateDate {
        path: PathBuf,
        line: usize,
        date: NaiveDate,
    },

    /// A data file's dates go backwards.
    #[error("{}:{line}: date {date} comes before the preceding date {prev}", path.display())]
    UnsortedDates {
        path: PathBuf,
        line: usize,
        date: NaiveDate,
        prev: NaiveDate,
    },

    /// An I/O failure, with the path that caused it.
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Coarse category for exit-code mapping.
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Config { .. } => ErrorCategory::Config,
            Error::Numeric { .. } => ErrorCategory::Numeric,
            _ => ErrorCategory::Data,
        }
    }

    /// Stable machine-readable identifier for reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InsufficientData { .. } => "insufficient-data",
            Error::InvalidValue { .. } => "invalid-value",
            Error::UnorderedDates { .. } => "unordered-dates",
            Error::DegenerateSample { .. } => "degenerate-sample",
            Error::AdjacentTie { .. } => "tie",
            Error::Domain { .. } => "domain",
            Error::InfeasibleMoments { .. } => "infeasible-moments",
            Error::GaussianLimit { .. } => "gaussian-limit",
            Error::Config { .. } => "configuration",
            Error::Numeric { .. } => "numeric",
            Error::Parse { .. } => "parse",
            Error::NonPositiveValue { .. } => "nonpositive-value",
            Error::DuplicateDate { .. } => "duplicate-date",
            Error::UnsortedDates { .. } => "unsorted-dates",
            Error::Io { .. } => "io",
        }
    }
}
