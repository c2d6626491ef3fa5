//! The M-test: an i.i.d.-ness test built on gaps between local extrema.
//!
//! For a sequence of i.i.d. draws from a continuous distribution, the
//! interior strict local maxima and minima alternate, and the gap τ between
//! consecutive extrema has mean E τ = 3/2 regardless of the distribution.
//! The test statistic
//!
//! ξₙ = √n · (m̂ₙ − 3/2),  m̂ₙ = mean of the n observed gaps,
//!
//! converges to a non-Gaussian limit law Y whose quantiles are obtained here
//! by Monte Carlo calibration; the i.i.d. hypothesis is rejected when ξ
//! falls outside the calibrated two-sided fractile interval.
//!
//! Because extrema positions are invariant under strictly monotone
//! transforms, the test is distribution-free: the calibration may simulate
//! any continuous distribution (standard uniform here) and applies to all.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::empirical_variance;

/// The expected gap between consecutive local extrema of an i.i.d.
/// continuous sequence: E τ = 3/2.
pub const EXPECTED_GAP: f64 = 1.5;

/// Probability levels at which calibration stores fractiles of ξ. Chosen to
/// support two-sided tests at overall levels 1%, 2%, 5%, 10%, and 20%.
pub const CALIBRATION_FRACTILE_LEVELS: [f64; 11] = [
    0.005, 0.01, 0.025, 0.05, 0.1, 0.5, 0.9, 0.95, 0.975, 0.99, 0.995,
];

/// Two-sided significance levels for which both tail fractiles are stored.
pub const SUPPORTED_LEVELS: [f64; 5] = [0.01, 0.02, 0.05, 0.1, 0.2];

/// Whether an interior point is a strict local maximum or minimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExtremumKind {
    Max,
    Min,
}

/// The interior strict local extrema of a sequence, in index order, plus the
/// gaps between consecutive extrema.
///
/// Invariants (guaranteed by [`local_extrema`]): kinds strictly alternate,
/// every position is interior (0 < index < n−1), and
/// `taus[i] = positions[i+1].0 − positions[i].0 ≥ 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtremaTrace {
    pub positions: Vec<(usize, ExtremumKind)>,
    pub taus: Vec<usize>,
}

/// The M-test statistic for one sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MTestStatistic {
    /// Mean gap m̂ between consecutive extrema (always ≥ 1).
    pub m_hat: f64,
    /// ξ = √(n_gaps) · (m̂ − 3/2).
    pub xi: f64,
    /// Number of gaps the mean is taken over.
    pub n_gaps: usize,
}

/// Monte Carlo calibration of the null distribution of ξ.
///
/// Serializes to a versioned JSON document with `fractiles` as a sorted
/// array of `[level, value]` pairs, so the CLI can cache and ship
/// calibration artifacts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTable {
    pub schema_version: u32,
    /// Sequence length simulated per replication.
    pub sample_size: usize,
    /// Number of replications pooled.
    pub replications: usize,
    /// RNG seed the table derives from.
    pub seed: u64,
    /// Empirical mean of the ξ pool.
    pub mean: f64,
    /// Empirical variance (divisor R−1) of the ξ pool.
    pub variance: f64,
    /// (probability level, empirical quantile) pairs, ascending in level.
    pub fractiles: Vec<(f64, f64)>,
}

impl CalibrationTable {
    /// The stored fractile at `level`, if the table has one.
    pub fn fractile(&self, level: f64) -> Option<f64> {
        self.fractiles
            .iter()
            .find(|(l, _)| (l - level).abs() <= 1e-9)
            .map(|&(_, q)| q)
    }

    /// Checks the structural invariants of a table loaded from outside
    /// (version, monotone levels in (0, 1), nondecreasing quantiles).
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != 1 {
            return Err(Error::Config {
                reason: format!(
                    "unsupported calibration table schema version {}",
                    self.schema_version
                ),
            });
        }
        if self.replications == 0 || self.fractiles.is_empty() {
            return Err(Error::Config {
                reason: "calibration table is empty".into(),
            });
        }
        for &(l, q) in &self.fractiles {
            if !(l > 0.0 && l < 1.0) || !q.is_finite() {
                return Err(Error::Config {
                    reason: format!("invalid fractile entry ({l}, {q})"),
                });
            }
        }
        // Entries are finite from here on, so plain comparisons are safe.
        for window in self.fractiles.windows(2) {
            let ((l0, q0), (l1, q1)) = (window[0], window[1]);
            if l0 >= l1 {
                return Err(Error::Config {
                    reason: format!("fractile levels not strictly increasing: {l0}, {l1}"),
                });
            }
            if q0 > q1 {
                return Err(Error::Config {
                    reason: format!("fractiles not monotone: q({l0}) = {q0} > q({l1}) = {q1}"),
                });
            }
        }
        Ok(())
    }
}

/// Outcome of the M-test at a given significance level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MTestOutcome {
    pub statistic: MTestStatistic,
    /// Two-sided significance level requested.
    pub level: f64,
    /// Lower acceptance bound: the level/2 fractile.
    pub lower: f64,
    /// Upper acceptance bound: the 1 − level/2 fractile.
    pub upper: f64,
    /// True iff ξ falls strictly outside [lower, upper].
    pub reject: bool,
    /// Bracket [p_lo, p_hi] on the two-sided p-value, as tight as the
    /// table's fractile grid allows.
    pub p_bracket: (f64, f64),
}

/// Finds the interior strict local extrema of a sequence and the gaps
/// between consecutive ones.
///
/// An interior index i is a local maximum when xs[i] > xs[i−1] and
/// xs[i] > xs[i+1], a local minimum with both inequalities reversed. The
/// test presumes a continuous distribution, so two adjacent equal values are
/// an error rather than something to perturb silently: pre-deduplicate the
/// data or add explicit jitter before calling if ties are expected.
pub fn local_extrema(xs: &[f64]) -> Result<ExtremaTrace> {
    let n = xs.len();
    if n < 3 {
        return Err(Error::InsufficientData {
            what: "local extrema",
            required: 3,
            actual: n,
        });
    }
    for (index, &x) in xs.iter().enumerate() {
        if !x.is_finite() {
            return Err(Error::Domain {
                reason: format!("sample contains non-finite value {x} at index {index}"),
            });
        }
    }
    for (index, pair) in xs.windows(2).enumerate() {
        if pair[0] == pair[1] {
            return Err(Error::AdjacentTie { index });
        }
    }

    let mut positions = Vec::with_capacity(2 * n / 3 + 4);
    for i in 1..n - 1 {
        if xs[i] > xs[i - 1] && xs[i] > xs[i + 1] {
            positions.push((i, ExtremumKind::Max));
        } else if xs[i] < xs[i - 1] && xs[i] < xs[i + 1] {
            positions.push((i, ExtremumKind::Min));
        }
    }
    let taus: Vec<usize> = positions
        .windows(2)
        .map(|pair| pair[1].0 - pair[0].0)
        .collect();
    debug_assert!(
        positions.windows(2).all(|pair| pair[0].1 != pair[1].1),
        "strict extrema of a tie-free sequence must alternate"
    );
    Ok(ExtremaTrace { positions, taus })
}

/// Computes m̂ and ξ = √(n_gaps)·(m̂ − 3/2) from an extrema trace.
///
/// `n_gaps` is the number of gaps actually observed (the count the mean is
/// taken over), not the length of the underlying series.
pub fn m_test_statistic(trace: &ExtremaTrace) -> Result<MTestStatistic> {
    let n_gaps = trace.taus.len();
    if n_gaps == 0 {
        return Err(Error::InsufficientData {
            what: "extrema gaps",
            required: 1,
            actual: 0,
        });
    }
    let m_hat = trace.taus.iter().sum::<usize>() as f64 / n_gaps as f64;
    let xi = (n_gaps as f64).sqrt() * (m_hat - EXPECTED_GAP);
    Ok(MTestStatistic { m_hat, xi, n_gaps })
}

/// ξ for one calibration replication: draw `n` standard uniforms from the
/// given substream and evaluate the statistic. In the (measure-zero, but
/// floating-point-possible) event of an adjacent tie or a monotone draw,
/// the replication keeps drawing fresh sequences from the same substream,
/// which stays deterministic.
fn xi_replication(seed: u64, stream: u64, n: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut xs = vec![0.0f64; n];
    loop {
        for x in xs.iter_mut() {
            *x = rng.random();
        }
        let Ok(trace) = local_extrema(&xs) else {
            continue;
        };
        let Ok(stat) = m_test_statistic(&trace) else {
            continue;
        };
        return stat.xi;
    }
}

fn nearest_rank(sorted: &[f64], level: f64) -> f64 {
    // Nearest-rank quantile: the ⌈level·R⌉-th order statistic. The tiny
    // subtraction keeps ⌈·⌉ honest when level·R is an integer that floating
    // point nudges upward (e.g. 0.005 · 10⁴).
    let r = sorted.len();
    let rank = (level * r as f64 - 1e-9).ceil() as usize;
    sorted[rank.clamp(1, r) - 1]
}

/// Monte Carlo calibration of the null law of ξ.
///
/// Simulates `replications` i.i.d. standard-uniform sequences of length
/// `sample_size` (the choice of continuous distribution is immaterial by
/// distribution-freeness), computes ξ for each, and stores the empirical
/// mean, variance, and the fractiles at [`CALIBRATION_FRACTILE_LEVELS`].
///
/// Replications run in parallel, each on its own counter-based RNG
/// substream derived from `(seed, replication index)`, so the result is
/// bit-identical regardless of thread scheduling — and identical to a
/// sequential run.
pub fn calibrate(sample_size: usize, replications: usize, seed: u64) -> Result<CalibrationTable> {
    if sample_size < 100 {
        return Err(Error::Config {
            reason: format!("calibration sample_size must be ≥ 100, got {sample_size}"),
        });
    }
    if replications < 100 {
        return Err(Error::Config {
            reason: format!("calibration replications must be ≥ 100, got {replications}"),
        });
    }
    let pool: Vec<f64> = (0..replications)
        .into_par_iter()
        .map(|rep| xi_replication(seed, rep as u64, sample_size))
        .collect();
    // Reductions are sequential over the replication-ordered pool so the
    // table is a pure function of (sample_size, replications, seed).
    let mean = pool.iter().sum::<f64>() / replications as f64;
    let variance = empirical_variance(&pool)?;
    let mut sorted = pool;
    sorted.sort_by(f64::total_cmp);
    let fractiles = CALIBRATION_FRACTILE_LEVELS
        .iter()
        .map(|&level| (level, nearest_rank(&sorted, level)))
        .collect();
    Ok(CalibrationTable {
        schema_version: 1,
        sample_size,
        replications,
        seed,
        mean,
        variance,
        fractiles,
    })
}

/// Bracket on the two-sided p-value implied by the table's fractile grid.
fn p_bracket(table: &CalibrationTable, xi: f64) -> (f64, f64) {
    // F(ξ) is known to lie between the largest stored level whose quantile
    // is ≤ ξ and the smallest whose quantile is ≥ ξ.
    let mut f_lo = 0.0f64;
    let mut f_hi = 1.0f64;
    for &(level, q) in &table.fractiles {
        if q <= xi {
            f_lo = f_lo.max(level);
        }
        if q >= xi {
            f_hi = f_hi.min(level);
        }
    }
    let p_lo = (2.0 * f_lo.min(1.0 - f_hi)).clamp(0.0, 1.0);
    let p_hi = (2.0 * f_hi.min(1.0 - f_lo)).clamp(0.0, 1.0);
    (p_lo, p_hi)
}

/// Runs the M-test on a sample at a two-sided significance level.
///
/// `level` must be one of [`SUPPORTED_LEVELS`] and the table must carry the
/// level/2 and 1 − level/2 fractiles. The i.i.d. hypothesis is rejected iff
/// ξ falls strictly outside that fractile interval.
pub fn m_test(xs: &[f64], table: &CalibrationTable, level: f64) -> Result<MTestOutcome> {
    if !SUPPORTED_LEVELS.iter().any(|&l| (l - level).abs() <= 1e-9) {
        return Err(Error::Config {
            reason: format!(
                "unsupported significance level {level}; supported: {SUPPORTED_LEVELS:?}"
            ),
        });
    }
    let lower_level = level / 2.0;
    let upper_level = 1.0 - level / 2.0;
    let lower = table.fractile(lower_level).ok_or_else(|| Error::Config {
        reason: format!("calibration table has no fractile at level {lower_level}"),
    })?;
    let upper = table.fractile(upper_level).ok_or_else(|| Error::Config {
        reason: format!("calibration table has no fractile at level {upper_level}"),
    })?;
    let trace = local_extrema(xs)?;
    let statistic = m_test_statistic(&trace)?;
    let reject = statistic.xi < lower || statistic.xi > upper;
    Ok(MTestOutcome {
        statistic,
        level,
        lower,
        upper,
        reject,
        p_bracket: p_bracket(table, statistic.xi),
    })
}
