//! R/S (rescaled range) analysis and Hurst-exponent estimation.
//!
//! For a window x₀ … x_{n−1} with partial sums S_k = Σ_{j<k} x_j (S₀ = 0),
//! the adjusted range is
//!
//! R = max_k B_k − min_k B_k,  B_k = S_k − (k/n)·S_n,  k = 0 … n−1,
//!
//! and S is the empirical standard deviation (divisor n−1) of the window.
//! The standardized range grows like R(n)/S(n) ≈ c·nᴴ; under i.i.d.
//! increments H = 1/2, so a log-log least-squares slope far from 1/2 speaks
//! against independence. Per-scale R/S values are obtained by averaging
//! disjoint blocks on a dyadic grid of window lengths.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::series::empirical_variance;

/// Mean standardized range at one window length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RsPoint {
    /// Window (block) length.
    pub n: usize,
    /// Mean of per-block R/S ratios over the usable blocks (> 0).
    pub rs: f64,
    /// Blocks that contributed to the mean.
    pub blocks_used: usize,
    /// Blocks skipped as degenerate (zero spread or zero range).
    pub blocks_skipped: usize,
}

/// Dyadic block scheme for [`rs_curve`]: window lengths n, n/2, n/4, …
/// (integer halving) down to `min_block`, each scale averaged over
/// ⌊n/nᵢ⌋ disjoint blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockScheme {
    /// Smallest window length kept in the grid (must be ≥ 2).
    pub min_block: usize,
}

impl Default for BlockScheme {
    fn default() -> Self {
        // Blocks shorter than 16 make R/S too noisy to average usefully.
        BlockScheme { min_block: 16 }
    }
}

/// Least-squares fit of ln(rs) against ln(n).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HurstFit {
    /// Slope: the Hurst exponent estimate Ĥ.
    pub h_hat: f64,
    /// exp(intercept): the fitted constant c in rs ≈ c·nᴴ.
    pub c_hat: f64,
    /// Residual sum of squares of the regression in log-log space.
    pub residual_sse: f64,
    /// The points the fit used, sorted by n (canonical order).
    pub points: Vec<RsPoint>,
}

/// The adjusted range R and standard deviation S of one window.
///
/// Returns the raw pair; a constant window legitimately yields S = 0 (and
/// R = 0), which callers such as [`rs_curve`] treat as a degenerate block.
pub fn range_stat(xs: &[f64]) -> Result<(f64, f64)> {
    let n = xs.len();
    if n < 2 {
        return Err(Error::InsufficientData {
            what: "range statistic window",
            required: 2,
            actual: n,
        });
    }
    let total: f64 = xs.iter().sum();
    let nf = n as f64;
    // Bridge over k = 0 … n−1; the k = 0 term is identically 0 and seeds
    // the running extrema.
    let mut partial = 0.0;
    let mut max_b = 0.0f64;
    let mut min_b = 0.0f64;
    for (k, &x) in xs.iter().enumerate().take(n - 1) {
        partial += x;
        let bridge = partial - ((k + 1) as f64 / nf) * total;
        max_b = max_b.max(bridge);
        min_b = min_b.min(bridge);
    }
    let r = max_b - min_b;
    let s = empirical_variance(xs)?.sqrt();
    Ok((r, s))
}

/// Mean R/S per dyadic scale, skipping degenerate blocks.
///
/// The grid is built by integer halving: lengths n, n/2, n/4, … while the
/// length stays ≥ `scheme.min_block`. Each scale partitions the sample into
/// ⌊n/nᵢ⌋ disjoint blocks from the start (a short tail remainder is
/// unused), averages R/S over blocks with positive spread and range, and
/// counts the skipped ones. A scale with no usable block is omitted; if no
/// scale survives at all the sample is reported degenerate. Blocks are
/// processed and summed in block order, so the curve is deterministic.
pub fn rs_curve(xs: &[f64], scheme: BlockScheme) -> Result<Vec<RsPoint>> {
    let n = xs.len();
    if n < 32 {
        return Err(Error::InsufficientData {
            what: "rescaled-range curve",
            required: 32,
            actual: n,
        });
    }
    if scheme.min_block < 2 {
        return Err(Error::Config {
            reason: format!(
                "block scheme min_block must be ≥ 2, got {}",
                scheme.min_block
            ),
        });
    }

    let mut lengths = Vec::new();
    let mut len = n;
    while len >= scheme.min_block {
        lengths.push(len);
        len /= 2;
    }

    let mut points = Vec::with_capacity(lengths.len());
    for &block_len in &lengths {
        let blocks = n / block_len;
        let mut sum = 0.0;
        let mut used = 0usize;
        let mut skipped = 0usize;
        for b in 0..blocks {
            let window = &xs[b * block_len..(b + 1) * block_len];
            let (r, s) = range_stat(window)?;
            if s > 0.0 && r > 0.0 {
                sum += r / s;
                used += 1;
            } else {
                skipped += 1;
            }
        }
        if used > 0 {
            points.push(RsPoint {
                n: block_len,
                rs: sum / used as f64,
                blocks_used: used,
                blocks_skipped: skipped,
            });
        }
    }
    if points.is_empty() {
        return Err(Error::DegenerateSample {
            reason: format!(
                "rescaled-range curve has zero usable points: every block on {} scales was degenerate",
                lengths.len()
            ),
        });
    }
    Ok(points)
}

/// Ordinary least squares of ln(rs) on ln(n): slope Ĥ, intercept ln ĉ.
///
/// Points are canonicalized (sorted by n, then rs) before the sums are
/// accumulated, so any permutation of the same points yields a bit-identical
/// fit. Requires at least 3 distinct window lengths.
pub fn hurst_estimate(points: &[RsPoint]) -> Result<HurstFit> {
    for p in points {
        if !(p.rs > 0.0 && p.rs.is_finite()) || p.n < 2 {
            return Err(Error::Domain {
                reason: format!("invalid R/S point (n = {}, rs = {})", p.n, p.rs),
            });
        }
    }
    let mut sorted: Vec<RsPoint> = points.to_vec();
    sorted.sort_by(|a, b| a.n.cmp(&b.n).then(a.rs.total_cmp(&b.rs)));

    let mut distinct = 0;
    let mut prev_n = None;
    for p in &sorted {
        if prev_n != Some(p.n) {
            distinct += 1;
            prev_n = Some(p.n);
        }
    }
    if distinct < 3 {
        return Err(Error::InsufficientData {
            what: "distinct rescaled-range scales",
            required: 3,
            actual: distinct,
        });
    }

    let m = sorted.len() as f64;
    let xs: Vec<f64> = sorted.iter().map(|p| (p.n as f64).ln()).collect();
    let ys: Vec<f64> = sorted.iter().map(|p| p.rs.ln()).collect();
    let x_mean = xs.iter().sum::<f64>() / m;
    let y_mean = ys.iter().sum::<f64>() / m;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (x - x_mean) * (x - x_mean);
        sxy += (x - x_mean) * (y - y_mean);
    }
    let h_hat = sxy / sxx;
    let intercept = y_mean - h_hat * x_mean;
    let residual_sse = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (intercept + h_hat * x);
            r * r
        })
        .sum();
    Ok(HurstFit {
        h_hat,
        c_hat: intercept.exp(),
        residual_sse,
        points: sorted,
    })
}
