//! Extreme-value-index estimation: the Pickands and Hill estimators.
//!
//! Both estimators read off the extreme value index γ from the largest order
//! statistics of a sample. A Gaussian sample has γ = 0, a power tail with
//! exponent α has γ = 1/α > 0, and a bounded-support distribution has γ < 0,
//! so consistent estimates far from zero speak against Gaussian increments.
//!
//! The exact forms are frozen here so tests are formula-stable:
//!
//! * Pickands: γ̂ = (1/ln 2) · ln[(X₍n−k+1₎ − X₍n−2k+1₎) / (X₍n−2k+1₎ − X₍n−4k+1₎)],
//! * Hill:     γ̂ = (1/k) Σ_{i=1..k} [ln X₍n−i+1₎ − ln X₍n−k₎],
//!
//! with X₍₁₎ ≤ … ≤ X₍n₎ the ascending order statistics. Pickands is
//! location-scale invariant and works for any sign of γ; Hill needs a
//! positive tail and is always ≥ 0 when defined.

use serde::Serialize;

use crate::error::{Error, Result};

/// Which tail estimator to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailMethod {
    Pickands,
    Hill,
}

impl std::fmt::Display for TailMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TailMethod::Pickands => f.write_str("pickands"),
            TailMethod::Hill => f.write_str("hill"),
        }
    }
}

/// An extreme-value-index estimate γ̂ at order-statistic depth `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailEstimate {
    pub gamma_hat: f64,
    pub k: usize,
    pub method: TailMethod,
}

/// Ascending order statistics of a sample, shared by both estimators so a
/// scan over many depths sorts only once.
#[derive(Debug, Clone)]
pub struct OrderStatistics {
    sorted: Vec<f64>,
}

impl OrderStatistics {
    /// Sorts a copy of the sample. Rejects empty and non-finite input.
    pub fn new(xs: &[f64]) -> Result<Self> {
        if xs.is_empty() {
            return Err(Error::InsufficientData {
                what: "order statistics",
                required: 1,
                actual: 0,
            });
        }
        if let Some(index) = xs.iter().position(|x| !x.is_finite()) {
            return Err(Error::Domain {
                reason: format!("sample contains non-finite value {} at index {index}", xs[index]),
            });
        }
        let mut sorted = xs.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(OrderStatistics { sorted })
    }

    pub fn n(&self) -> usize {
        self.sorted.len()
    }

    /// The i-th order statistic X₍ᵢ₎, 1-based: `at(1)` is the minimum,
    /// `at(n)` the maximum.
    pub fn at(&self, i: usize) -> f64 {
        self.sorted[i - 1]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.sorted
    }

    /// Pickands estimate at depth `k`. Requires n ≥ 4k; the two spacings in
    /// the formula must both be nonzero, otherwise the estimate is infinite
    /// or undefined and a degenerate-sample error is returned (the estimator
    /// presumes a continuous distribution, so exact ties are ruled out
    /// rather than perturbed).
    pub fn pickands(&self, k: usize) -> Result<TailEstimate> {
        let n = self.n();
        if k == 0 {
            return Err(Error::Config {
                reason: "Pickands depth k must be a positive integer".into(),
            });
        }
        if n < 4 * k {
            return Err(Error::InsufficientData {
                what: "Pickands estimator",
                required: 4 * k,
                actual: n,
            });
        }
        let upper = self.at(n - k + 1);
        let middle = self.at(n - 2 * k + 1);
        let lower = self.at(n - 4 * k + 1);
        let numerator = upper - middle;
        let denominator = middle - lower;
        if denominator <= 0.0 {
            return Err(Error::DegenerateSample {
                reason: format!(
                    "Pickands spacing X_({}) − X_({}) is zero (tied order statistics at k = {k})",
                    n - 2 * k + 1,
                    n - 4 * k + 1
                ),
            });
        }
        if numerator <= 0.0 {
            return Err(Error::DegenerateSample {
                reason: format!(
                    "Pickands spacing X_({}) − X_({}) is zero (tied order statistics at k = {k})",
                    n - k + 1,
                    n - 2 * k + 1
                ),
            });
        }
        Ok(TailEstimate {
            gamma_hat: (numerator / denominator).ln() / std::f64::consts::LN_2,
            k,
            method: TailMethod::Pickands,
        })
    }

    /// Hill estimate at depth `k`. Requires 1 ≤ k < n and the top k+1 order
    /// statistics strictly positive (the estimator takes their logarithms).
    pub fn hill(&self, k: usize) -> Result<TailEstimate> {
        let n = self.n();
        if k == 0 {
            return Err(Error::Config {
                reason: "Hill depth k must be a positive integer".into(),
            });
        }
        if k >= n {
            return Err(Error::InsufficientData {
                what: "Hill estimator",
                required: k + 1,
                actual: n,
            });
        }
        let base = self.at(n - k);
        if base <= 0.0 {
            return Err(Error::Domain {
                reason: format!(
                    "Hill estimator needs the top {} order statistics strictly positive, but X_({}) = {base}",
                    k + 1,
                    n - k
                ),
            });
        }
        let ln_base = base.ln();
        let sum: f64 = (1..=k).map(|i| self.at(n - i + 1).ln() - ln_base).sum();
        Ok(TailEstimate {
            gamma_hat: sum / k as f64,
            k,
            method: TailMethod::Hill,
        })
    }

    fn estimate(&self, k: usize, method: TailMethod) -> Result<TailEstimate> {
        match method {
            TailMethod::Pickands => self.pickands(k),
            TailMethod::Hill => self.hill(k),
        }
    }
}

/// Pickands estimate of the extreme value index at depth `k`.
///
/// See [`OrderStatistics::pickands`] for the formula and preconditions.
pub fn pickands(xs: &[f64], k: usize) -> Result<TailEstimate> {
    OrderStatistics::new(xs)?.pickands(k)
}

/// Hill estimate of the extreme value index at depth `k`.
///
/// See [`OrderStatistics::hill`] for the formula and preconditions.
pub fn hill(xs: &[f64], k: usize) -> Result<TailEstimate> {
    OrderStatistics::new(xs)?.hill(k)
}

/// One row of a [`tail_scan`]: either the estimate at this depth or the
/// reason it could not be computed there.
#[derive(Debug)]
pub struct TailScanEntry {
    pub k: usize,
    pub result: Result<TailEstimate>,
}

/// Evaluates one estimator across a grid of depths, in grid order.
///
/// Per-depth failures (ties, domain violations, too-large k) are carried as
/// flagged entries rather than aborting the scan, so a stability-in-k plot
/// can still show every depth that worked. The sample is sorted once and
/// shared across the grid.
pub fn tail_scan(xs: &[f64], k_grid: &[usize], method: TailMethod) -> Vec<TailScanEntry> {
    let order = match OrderStatistics::new(xs) {
        Ok(order) => order,
        Err(first_err) => {
            // The sample itself is unusable: flag every grid entry with the
            // same kind of failure.
            let mut entries = Vec::with_capacity(k_grid.len());
            let mut err = Some(first_err);
            for &k in k_grid {
                let e = err.take().unwrap_or_else(|| match OrderStatistics::new(xs) {
                    Err(e) => e,
                    Ok(_) => unreachable!("sample validity cannot change between calls"),
                });
                entries.push(TailScanEntry { k, result: Err(e) });
            }
            return entries;
        }
    };
    k_grid
        .iter()
        .map(|&k| TailScanEntry {
            k,
            result: order.estimate(k, method),
        })
        .collect()
}

/// Default order-statistic depth: k = ⌊n^0.6⌋ (at least 1), a standard
/// bias/variance compromise. For Pickands the depth is additionally clamped
/// to n/4 − 1 so the n ≥ 4k precondition holds with slack.
///
/// The power is evaluated in floating point, so e.g. n = 10⁵ yields 999.
pub fn default_k(n: usize, method: TailMethod) -> usize {
    let base = (n as f64).powf(0.6).floor() as usize;
    let base = base.max(1);
    match method {
        TailMethod::Hill => base,
        TailMethod::Pickands => base.min((n / 4).saturating_sub(1).max(1)),
    }
}

/// A log-spaced grid of depths between `min_k` and `max_k` (inclusive),
/// deduplicated and ascending; useful as the input to [`tail_scan`].
pub fn k_grid(min_k: usize, max_k: usize, count: usize) -> Vec<usize> {
    let min_k = min_k.max(1);
    let max_k = max_k.max(min_k);
    if count == 0 {
        return Vec::new();
    }
    if count == 1 || min_k == max_k {
        return vec![min_k];
    }
    let ln_min = (min_k as f64).ln();
    let ln_max = (max_k as f64).ln();
    let mut grid = Vec::with_capacity(count);
    for i in 0..count {
        let t = i as f64 / (count - 1) as f64;
        let k = (ln_min + t * (ln_max - ln_min)).exp().round() as usize;
        let k = k.clamp(min_k, max_k);
        if grid.last() != Some(&k) {
            grid.push(k);
        }
    }
    grid
}
