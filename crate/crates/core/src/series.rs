//! Positive time series, log-increments, and elementary moment statistics.
//!
//! The model under investigation says that a positive series X₁, X₂, … has
//! independent Gaussian log-increments xₖ = ln(Xₖ₊₁ / Xₖ). Everything else in
//! this crate consumes those increments, so this module owns the validated
//! series type, the increment transform, and the summary moments (mean,
//! variance, skewness, excess kurtosis) that later tests compare against
//! their Gaussian values.

use chrono::NaiveDate;
use serde::Serialize;

use crate::error::{Error, Result};

/// One dated observation of a positive series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesPoint {
    pub date: NaiveDate,
    pub value: f64,
}

/// A validated positive time series: at least two points, strictly positive
/// finite values, strictly increasing dates.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    points: Vec<SeriesPoint>,
}

impl Series {
    /// Validates and wraps a point sequence.
    ///
    /// Requires at least two points (otherwise there are no increments),
    /// strictly positive finite values (logarithms must exist), and strictly
    /// increasing dates.
    pub fn new(points: Vec<SeriesPoint>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InsufficientData {
                what: "series",
                required: 2,
                actual: points.len(),
            });
        }
        for (index, point) in points.iter().enumerate() {
            if !(point.value.is_finite() && point.value > 0.0) {
                return Err(Error::InvalidValue {
                    index,
                    value: point.value,
                });
            }
        }
        for (index, pair) in points.windows(2).enumerate() {
            if pair[1].date <= pair[0].date {
                return Err(Error::UnorderedDates {
                    index: index + 1,
                    date: pair[1].date,
                    prev: pair[0].date,
                });
            }
        }
        Ok(Series { points })
    }

    pub fn points(&self) -> &[SeriesPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false // a Series always holds at least two points
    }

    pub fn first_date(&self) -> NaiveDate {
        self.points[0].date
    }

    pub fn last_date(&self) -> NaiveDate {
        self.points[self.points.len() - 1].date
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.value)
    }

    /// The log-increments xₖ = ln(Xₖ₊₁ / Xₖ), k = 1 … n−1.
    ///
    /// Each increment is dated by the *later* of the two observations it
    /// connects.
    pub fn log_increments(&self) -> Increments {
        let values: Vec<f64> = self
            .points
            .windows(2)
            .map(|pair| (pair[1].value / pair[0].value).ln())
            .collect();
        let dates: Vec<NaiveDate> = self.points[1..].iter().map(|p| p.date).collect();
        Increments { values, dates }
    }
}

/// Log-increments of a [`Series`], dated by the later endpoint of each step.
#[derive(Debug, Clone, PartialEq)]
pub struct Increments {
    values: Vec<f64>,
    dates: Vec<NaiveDate>,
}

impl Increments {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl std::ops::Deref for Increments {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.values
    }
}

/// First four standardized moments of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentSummary {
    pub mean: f64,
    /// Unbiased variance (divisor n−1).
    pub variance: f64,
    /// m₃ / m₂^{3/2} with divisor-n central moments.
    pub skewness: f64,
    /// m₄ / m₂² − 3 with divisor-n central moments.
    pub excess_kurtosis: f64,
}

/// Unbiased empirical variance (divisor n−1). Requires n ≥ 2.
pub fn empirical_variance(xs: &[f64]) -> Result<f64> {
    let n = xs.len();
    if n < 2 {
        return Err(Error::InsufficientData {
            what: "empirical variance",
            required: 2,
            actual: n,
        });
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let ss = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>();
    Ok(ss / (n - 1) as f64)
}

/// Mean, unbiased variance, skewness, and excess kurtosis of a sample.
///
/// Skewness and kurtosis use divisor-n central moments (the plain method of
/// moments, no small-sample bias correction): skew = m₃/m₂^{3/2} and excess
/// kurtosis = m₄/m₂² − 3, so an exactly Gaussian population has skew 0 and
/// excess kurtosis 0. Requires n ≥ 4 and a strictly positive spread.
pub fn moment_summary(xs: &[f64]) -> Result<MomentSummary> {
    let n = xs.len();
    if n < 4 {
        return Err(Error::InsufficientData {
            what: "moment summary",
            required: 4,
            actual: n,
        });
    }
    let nf = n as f64;
    let mean = xs.iter().sum::<f64>() / nf;
    let mut m2 = 0.0;
    let mut m3 = 0.0;
    let mut m4 = 0.0;
    for &x in xs {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= nf;
    m3 /= nf;
    m4 /= nf;
    if m2 <= 0.0 {
        return Err(Error::DegenerateSample {
            reason: "all values are equal; higher moments are undefined".into(),
        });
    }
    Ok(MomentSummary {
        mean,
        variance: m2 * nf / (nf - 1.0),
        skewness: m3 / m2.powf(1.5),
        excess_kurtosis: m4 / (m2 * m2) - 3.0,
    })
}
