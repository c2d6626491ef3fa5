//! Diagnostics for the i.i.d.-Gaussian log-increment model of positive time
//! series.
//!
//! The model under test says a positive series (an exchange rate, a price)
//! has log-increments xₖ = ln(Xₖ₊₁/Xₖ) that are independent, identically
//! distributed Gaussians. This crate implements a battery of statistics
//! that probe that hypothesis from several directions, plus a reporting
//! pipeline that applies them per calendar window:
//!
//! * [`series`] — validated positive series, log-increments, and moment
//!   summaries (mean, variance, skewness, excess kurtosis);
//! * [`tail`] — Pickands and Hill estimators of the extreme value index
//!   (γ = 0 for Gaussian tails, γ > 0 for power tails);
//! * [`extrema`] — the M-test: a distribution-free i.i.d.-ness test built
//!   on gaps between local extrema, with Monte Carlo calibration;
//! * [`rescaled_range`] — R/S analysis and the Hurst exponent (H = 1/2
//!   under independent increments);
//! * [`nig`] — the normal inverse Gaussian family: density via the K₁
//!   Bessel integral, moment formulas, and method-of-moments fitting;
//! * [`pipeline`] — CSV ingestion, half-year/crisis windowing, the full
//!   battery per window, and JSON/CSV report emission.

pub mod error;
pub mod extrema;
pub mod nig;
pub mod pipeline;
pub mod rescaled_range;
pub mod series;
pub mod tail;

pub use error::{Error, ErrorCategory, Result};
pub use extrema::{
    calibrate, local_extrema, m_test, m_test_statistic, CalibrationTable, ExtremaTrace,
    ExtremumKind, MTestOutcome, MTestStatistic, CALIBRATION_FRACTILE_LEVELS, EXPECTED_GAP,
    SUPPORTED_LEVELS,
};
pub use nig::{
    bessel_k1, bessel_k1_scaled, fit_nig_moments, fit_nig_sample, nig_moments, nig_pdf,
    MomentVector, NigFitReport, NigParams, NigShape, ZETA_STABILITY_THRESHOLD,
};
pub use rescaled_range::{hurst_estimate, range_stat, rs_curve, BlockScheme, HurstFit, RsPoint};
pub use series::{
    empirical_variance, moment_summary, Increments, MomentSummary, Series, SeriesPoint,
};
pub use tail::{
    default_k, hill, k_grid, pickands, tail_scan, OrderStatistics, TailEstimate, TailMethod,
    TailScanEntry,
};
