//! The normal inverse Gaussian (NIG) family: density, moments, and
//! method-of-moments fitting.
//!
//! The density with parameters (α, β, δ, μ), α > |β|, δ > 0, is
//!
//! f(x) = (αδ/π) · K₁(α√(δ² + (x−μ)²)) / √(δ² + (x−μ)²)
//!        · exp(δ√(α²−β²) + β(x−μ)),
//!
//! where K₁ is the modified Bessel function of the second kind,
//! K₁(x) = ½ ∫₀^∞ exp(−x/2·(y + 1/y)) dy. In the shape coordinates
//! ζ = δ√(α²−β²) and τ = β/√(α²−β²) the first four moments are
//!
//! E = μ + δτ,  V = δ²(1+τ²)/ζ,  S = 3τ/√(ζ(1+τ²)),
//! K = (3/ζ)·(1 + 4τ²/(1+τ²)),
//!
//! with K the EXCESS kurtosis (it vanishes in the Gaussian limit ζ → ∞).
//! Fitting inverts these four equations in closed form; eliminating ζ
//! between the S and K equations yields τ² = s²/(3k − 5s²) and
//! ζ = 9/(3k − 4s²), which requires the feasibility condition 3k > 5s².

use serde::Serialize;

use crate::error::{Error, Result};
use crate::series::moment_summary;

/// ζ values above this are flagged as unstable by [`fit_nig_sample`]:
/// near-Gaussian samples (3k − 5s² small) send ζ and δ to infinity, and
/// fits in that regime swing wildly between windows.
pub const ZETA_STABILITY_THRESHOLD: f64 = 1e3;

/// Parameters (α, β, δ, μ) of an NIG distribution.
///
/// Invariants, enforced at construction: α > |β| (so √(α²−β²) is real and
/// positive), δ > 0, all finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NigParams {
    alpha: f64,
    beta: f64,
    delta: f64,
    mu: f64,
}

impl NigParams {
    pub fn new(alpha: f64, beta: f64, delta: f64, mu: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite() && delta.is_finite() && mu.is_finite()) {
            return Err(Error::Domain {
                reason: format!("NIG parameters must be finite, got ({alpha}, {beta}, {delta}, {mu})"),
            });
        }
        if !(alpha > 0.0 && beta.abs() < alpha) {
            return Err(Error::Domain {
                reason: format!("NIG requires α > |β|, got α = {alpha}, β = {beta}"),
            });
        }
        if delta <= 0.0 {
            return Err(Error::Domain {
                reason: format!("NIG requires δ > 0, got δ = {delta}"),
            });
        }
        Ok(NigParams {
            alpha,
            beta,
            delta,
            mu,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// √(α² − β²), the decay-rate factor shared by ζ and τ.
    fn gamma_bar(&self) -> f64 {
        (self.alpha * self.alpha - self.beta * self.beta).sqrt()
    }

    /// The scale-invariant shape coordinates (ζ, τ).
    pub fn shape(&self) -> NigShape {
        let gamma_bar = self.gamma_bar();
        NigShape {
            zeta: self.delta * gamma_bar,
            tau: self.beta / gamma_bar,
        }
    }
}

/// Shape coordinates ζ = δ√(α²−β²) > 0 and τ = β/√(α²−β²); together with
/// δ they reconstruct α = ζ√(1+τ²)/δ and β = ζτ/δ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NigShape {
    pub zeta: f64,
    pub tau: f64,
}

/// Mean, variance, skewness, and excess kurtosis, as one vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentVector {
    pub e: f64,
    pub v: f64,
    pub s: f64,
    pub k: f64,
}

/// Result of fitting an NIG distribution to a sample by moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NigFitReport {
    pub params: NigParams,
    pub shape: NigShape,
    /// The sample moments the fit inverted.
    pub moments: MomentVector,
    /// True iff ζ exceeds [`ZETA_STABILITY_THRESHOLD`] (near-Gaussian
    /// sample; the fitted parameters are poorly determined).
    pub unstable: bool,
}

// ---------------------------------------------------------------------------
// K₁ Bessel function by adaptive quadrature.
// ---------------------------------------------------------------------------

/// Hard cap on integrand evaluations per K₁ call.
const K1_EVAL_CAP: usize = 100_000;
/// Relative tolerance driving the adaptive refinement.
const K1_REL_TOL: f64 = 1e-11;

/// Integrand of the exponentially scaled Bessel integral
/// e^x·K₁(x) = ∫₀^∞ exp(−x(cosh t − 1))·cosh t dt, evaluated in log space
/// so large t neither overflows cosh nor loses the cancellation:
/// ln cosh t = t + ln(1+e^{−2t}) − ln 2 and cosh t − 1 = 2 sinh²(t/2).
fn k1_scaled_integrand(t: f64, x: f64) -> f64 {
    let ln_cosh = t + (-2.0 * t).exp().ln_1p() - std::f64::consts::LN_2;
    let sh = (0.5 * t).sinh();
    (ln_cosh - x * 2.0 * sh * sh).exp()
}

/// Truncation point: the smallest t beyond which the integrand is below
/// e^{−46} of its overall scale, so the discarded tail is negligible at the
/// requested tolerance.
fn k1_truncation(x: f64) -> f64 {
    let mut t = (92.0 / x).sqrt().clamp(1e-6, 60.0);
    for _ in 0..400 {
        let sh = (0.5 * t).sinh();
        let ln_cosh = t + (-2.0 * t).exp().ln_1p() - std::f64::consts::LN_2;
        if x * 2.0 * sh * sh - ln_cosh >= 46.0 {
            return t;
        }
        t *= 1.25;
    }
    t
}

fn composite_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut acc = f(a) + f(b);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Classic adaptive Simpson with Richardson correction. `tol` is absolute
/// for the current interval and halves with each split; `budget` counts the
/// remaining integrand evaluations.
#[allow(clippy::too_many_arguments)]
fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    fa: f64,
    m: f64,
    fm: f64,
    b: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    budget: &mut usize,
    context: &str,
) -> Result<f64> {
    if *budget < 2 {
        return Err(Error::Numeric {
            reason: format!(
                "{context}: adaptive quadrature exceeded {K1_EVAL_CAP} integrand evaluations \
                 while refining [{a:.6e}, {b:.6e}] to tolerance {tol:.3e}"
            ),
        });
    }
    *budget -= 2;
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    // depth == 0 means the interval is already narrower than floating point
    // can meaningfully subdivide; accept the Richardson-corrected value.
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    let l = adaptive_simpson(f, a, fa, lm, flm, m, fm, left, 0.5 * tol, depth - 1, budget, context)?;
    let r = adaptive_simpson(f, m, fm, rm, frm, b, fb, right, 0.5 * tol, depth - 1, budget, context)?;
    Ok(l + r)
}

/// Exponentially scaled Bessel function e^x·K₁(x), x > 0.
///
/// This is the numerically safe form for large arguments (K₁ itself
/// underflows past x ≈ 745) and what the density evaluates internally.
pub fn bessel_k1_scaled(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::Domain {
            reason: format!("bessel_k1 requires x > 0, got {x}"),
        });
    }
    let t_max = k1_truncation(x);
    let f = |t: f64| k1_scaled_integrand(t, x);
    let mut budget = K1_EVAL_CAP;

    // A fixed composite pass sets the scale for the relative tolerance; the
    // adaptive pass then refines from scratch to that absolute tolerance.
    budget -= 65;
    let coarse = composite_simpson(&f, 0.0, t_max, 64);
    let tol = K1_REL_TOL * coarse.abs().max(f64::MIN_POSITIVE);

    budget -= 3;
    let fa = f(0.0);
    let m = 0.5 * t_max;
    let fm = f(m);
    let fb = f(t_max);
    let whole = t_max / 6.0 * (fa + 4.0 * fm + fb);
    let context = format!("e^x·K₁(x) at x = {x}");
    adaptive_simpson(&f, 0.0, fa, m, fm, t_max, fb, whole, tol, 60, &mut budget, &context)
}

/// The modified Bessel function K₁(x) = ½ ∫₀^∞ exp(−x/2·(y+1/y)) dy, x > 0,
/// to relative accuracy ~10⁻¹⁰.
///
/// Evaluated as e^{−x}·(e^x·K₁(x)); for x ≳ 745 the result underflows to 0.
pub fn bessel_k1(x: f64) -> Result<f64> {
    Ok((-x).exp() * bessel_k1_scaled(x)?)
}

// ---------------------------------------------------------------------------
// Density and moments.
// ---------------------------------------------------------------------------

/// The NIG density at `x`.
///
/// Evaluated in log space with the scaled Bessel function, so the two huge
/// opposing exponents at large |x − μ| cancel analytically instead of
/// producing 0·∞.
pub fn nig_pdf(x: f64, p: &NigParams) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain {
            reason: format!("nig_pdf requires finite x, got {x}"),
        });
    }
    let dx = x - p.mu;
    let q = p.delta.hypot(dx); // √(δ² + (x−μ)²)
    let a = p.alpha * q;
    let scaled = bessel_k1_scaled(a)?;
    let ln_f = (p.alpha * p.delta / std::f64::consts::PI).ln() + scaled.ln() - a - q.ln()
        + p.delta * p.gamma_bar()
        + p.beta * dx;
    Ok(ln_f.exp())
}

/// The first four moments (mean, variance, skewness, excess kurtosis) of an
/// NIG distribution, via the shape coordinates.
pub fn nig_moments(p: &NigParams) -> MomentVector {
    let NigShape { zeta, tau } = p.shape();
    let tau2 = tau * tau;
    MomentVector {
        e: p.mu + p.delta * tau,
        v: p.delta * p.delta * (1.0 + tau2) / zeta,
        s: 3.0 * tau / (zeta * (1.0 + tau2)).sqrt(),
        k: 3.0 / zeta * (1.0 + 4.0 * tau2 / (1.0 + tau2)),
    }
}

/// Closed-form method-of-moments inversion.
///
/// τ² = s²/(3k − 5s²) with sign(τ) = sign(s), ζ = 9/(3k − 4s²),
/// δ = √(v·ζ/(1+τ²)), μ = e − δτ, then α = ζ√(1+τ²)/δ and β = ζτ/δ.
/// Requires v > 0 and the feasibility condition 3k > 5s²; a sample with
/// s = 0 and k ≤ 0 has no finite NIG representation (the Gaussian limit).
pub fn fit_nig_moments(m: &MomentVector) -> Result<NigParams> {
    if !(m.e.is_finite() && m.s.is_finite() && m.k.is_finite()) || !(m.v.is_finite() && m.v > 0.0)
    {
        return Err(Error::Domain {
            reason: format!(
                "moment vector must be finite with v > 0, got (e={}, v={}, s={}, k={})",
                m.e, m.v, m.s, m.k
            ),
        });
    }
    let s2 = m.s * m.s;
    if m.s == 0.0 && m.k <= 0.0 {
        return Err(Error::GaussianLimit { s: m.s, k: m.k });
    }
    let d = 3.0 * m.k - 5.0 * s2;
    if d <= 0.0 {
        return Err(Error::InfeasibleMoments { s: m.s, k: m.k });
    }
    let tau = (s2 / d).sqrt().copysign(m.s);
    let zeta = 9.0 / (3.0 * m.k - 4.0 * s2); // 3k − 4s² = d + s² > 0 here
    let root = tau.hypot(1.0); // √(1 + τ²), overflow-safe
    let delta = (m.v * zeta).sqrt() / root;
    let mu = m.e - delta * tau;
    let alpha = zeta * root / delta;
    let beta = zeta * tau / delta;
    NigParams::new(alpha, beta, delta, mu).map_err(|_| Error::Numeric {
        reason: format!(
            "moment inversion landed on the feasibility boundary (3k − 5s² = {d:.3e}): \
             τ² = {:.3e} exceeds floating-point resolution of α > |β|",
            tau * tau
        ),
    })
}

/// Fits an NIG distribution to a sample by the method of moments.
///
/// Composes the sample moment summary (same skewness/excess-kurtosis
/// conventions) with [`fit_nig_moments`], and reports ζ together with an
/// instability flag: ζ > [`ZETA_STABILITY_THRESHOLD`] marks a near-Gaussian
/// sample whose fitted parameters should not be trusted across windows.
pub fn fit_nig_sample(xs: &[f64]) -> Result<NigFitReport> {
    if xs.len() < 8 {
        return Err(Error::InsufficientData {
            what: "NIG sample fit",
            required: 8,
            actual: xs.len(),
        });
    }
    let summary = moment_summary(xs)?;
    let moments = MomentVector {
        e: summary.mean,
        v: summary.variance,
        s: summary.skewness,
        k: summary.excess_kurtosis,
    };
    let params = fit_nig_moments(&moments)?;
    let shape = params.shape();
    Ok(NigFitReport {
        params,
        shape,
        moments,
        unstable: shape.zeta > ZETA_STABILITY_THRESHOLD,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, InverseGaussian, StandardNormal};

    // -- K₁ ----------------------------------------------------------------

    #[test]
    fn k1_frozen_value_at_one() {
        // Independently pinned by brute-force quadrature of the defining
        // integral at extreme resolution.
        assert_abs_diff_eq!(bessel_k1(1.0).unwrap(), 0.6019072302, epsilon = 1e-9);
    }

    #[test]
    fn k1_against_two_term_asymptotic_at_ten() {
        // √(π/2x)·e^{−x}·(1 + 3/(8x)) truncates the asymptotic series after
        // two terms; the neglected third term is ≈ −15/(128x²) ≈ −1.2·10⁻³
        // relative at x = 10, which bounds the agreement achievable here.
        let two_term = (std::f64::consts::PI / 20.0).sqrt() * (-10.0f64).exp() * (1.0 + 3.0 / 80.0);
        let k1 = bessel_k1(10.0).unwrap();
        assert_relative_eq!(k1, two_term, max_relative = 2e-3);
    }

    #[test]
    fn k1_is_monotone_decreasing() {
        let k1_1 = bessel_k1(1.0).unwrap();
        let k1_2 = bessel_k1(2.0).unwrap();
        let k1_4 = bessel_k1(4.0).unwrap();
        assert!(k1_1 > k1_2 && k1_2 > k1_4, "{k1_1} > {k1_2} > {k1_4}");
    }

    #[test]
    fn k1_rejects_nonpositive_arguments() {
        assert!(matches!(bessel_k1(0.0), Err(Error::Domain { .. })));
        assert!(matches!(bessel_k1(-1.0), Err(Error::Domain { .. })));
        assert!(matches!(bessel_k1(f64::NAN), Err(Error::Domain { .. })));
    }

    /// Brute-force oracle: composite Simpson on the *defining* integral
    /// ½∫₀^∞ exp(−x/2·(y+1/y)) dy in y-space, resolution-doubled until two
    /// successive refinements agree. Independent of the production path
    /// (different variable, different quadrature driver).
    fn k1_bruteforce(x: f64) -> f64 {
        // Integrand peaks at y = 1 and decays like e^{−xy/2}; truncate where
        // the exponent is 60 below the peak value −x.
        let y_max = (2.0 * (60.0 + x) / x).max(4.0);
        let y_min = 1.0 / y_max;
        let f = |y: f64| (-0.5 * x * (y + 1.0 / y)).exp();
        let mut panels = 1 << 10;
        let mut prev = f64::NAN;
        loop {
            let mut acc = f(y_min) + f(y_max);
            let h = (y_max - y_min) / panels as f64;
            for i in 1..panels {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                acc += w * f(y_min + i as f64 * h);
            }
            let value = 0.5 * acc * h / 3.0;
            // Stabilization threshold sits above the f64 accumulation noise
            // of ~10⁷-term sums yet well below the 10⁻⁸ comparison tolerance.
            if (value - prev).abs() <= 1e-10 * value.abs() {
                return value;
            }
            prev = value;
            panels *= 2;
            assert!(panels <= 1 << 24, "oracle did not stabilize at x = {x}");
        }
    }

    #[test]
    fn k1_matches_bruteforce_oracle_across_scales() {
        for &x in &[0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0] {
            let oracle = k1_bruteforce(x);
            let value = bessel_k1(x).unwrap();
            assert_relative_eq!(value, oracle, max_relative = 1e-8);
        }
    }

    // -- density -----------------------------------------------------------

    fn example_params() -> NigParams {
        NigParams::new(2.0, 1.0, 1.0, 0.0).unwrap()
    }

    #[test]
    fn params_enforce_invariants() {
        assert!(NigParams::new(1.0, 1.0, 1.0, 0.0).is_err()); // |β| = α
        assert!(NigParams::new(1.0, -1.5, 1.0, 0.0).is_err());
        assert!(NigParams::new(-1.0, 0.0, 1.0, 0.0).is_err());
        assert!(NigParams::new(1.0, 0.0, 0.0, 0.0).is_err());
        assert!(NigParams::new(1.0, 0.0, 1.0, f64::NAN).is_err());
        assert!(NigParams::new(2.0, -1.9, 0.5, 3.0).is_ok());
    }

    #[test]
    fn symmetric_density_is_even_around_mu() {
        for &(alpha, delta, mu) in &[(1.0, 1.0, 0.0), (2.5, 0.4, 0.7)] {
            let p = NigParams::new(alpha, 0.0, delta, mu).unwrap();
            for &h in &[0.1, 1.0, 5.0] {
                let right = nig_pdf(mu + h, &p).unwrap();
                let left = nig_pdf(mu - h, &p).unwrap();
                assert_relative_eq!(right, left, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn density_is_positive_far_out() {
        let p = example_params();
        for &x in &[-100.0, 0.0, 100.0] {
            let f = nig_pdf(x, &p).unwrap();
            assert!(f > 0.0, "f({x}) = {f}");
        }
    }

    /// Composite-Simpson integration of (f, x·f, x²·f) with resolution
    /// doubling — the test-side oracle for normalization and moments.
    fn integrate_pdf(p: &NigParams, lo: f64, hi: f64) -> (f64, f64, f64) {
        let f = |x: f64| nig_pdf(x, p).unwrap();
        let mut panels = 1 << 11;
        let mut prev: Option<[f64; 3]> = None;
        loop {
            let h = (hi - lo) / panels as f64;
            let mut acc = [0.0f64; 3];
            for i in 0..=panels {
                let x = lo + i as f64 * h;
                let w = if i == 0 || i == panels {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                let fx = f(x);
                acc[0] += w * fx;
                acc[1] += w * x * fx;
                acc[2] += w * x * x * fx;
            }
            for a in &mut acc {
                *a *= h / 3.0;
            }
            if let Some(prev) = prev {
                if (prev[0] - acc[0]).abs() <= 1e-9
                    && (prev[1] - acc[1]).abs() <= 1e-9 * (1.0 + acc[1].abs())
                    && (prev[2] - acc[2]).abs() <= 1e-9 * (1.0 + acc[2].abs())
                {
                    return (acc[0], acc[1], acc[2]);
                }
            }
            prev = Some(acc);
            panels *= 2;
            assert!(panels <= 1 << 21, "pdf integration did not stabilize");
        }
    }

    /// Integration window wide enough that the discarded tails are far
    /// below the tolerances in play (density decays like e^{−(α∓β)|x−μ|}).
    fn integration_window(p: &NigParams) -> (f64, f64) {
        let m = nig_moments(p);
        let gamma_bar = (p.alpha() * p.alpha() - p.beta() * p.beta()).sqrt();
        let margin = p.delta() * gamma_bar + 45.0;
        let lo = p.mu() - margin / (p.alpha() + p.beta()) - 8.0 * m.v.sqrt() - 2.0 * p.delta();
        let hi = p.mu() + margin / (p.alpha() - p.beta()) + 8.0 * m.v.sqrt() + 2.0 * p.delta();
        (lo, hi)
    }

    #[test]
    fn density_normalizes_on_the_example() {
        let p = example_params();
        let (mass, _, _) = integrate_pdf(&p, -30.0, 30.0);
        assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn density_normalizes_and_matches_moments_on_a_battery() {
        // Spot battery inside the supported ranges (α ∈ [0.5, 5],
        // |β| < 0.9α, δ ∈ [0.1, 3], |μ| ≤ 2); the randomized sweep lives in
        // the acceptance suite.
        let battery = [
            (0.5, 0.2, 0.5, 0.3),
            (1.0, -0.5, 2.0, -1.0),
            (3.0, 2.0, 0.3, 0.0),
            (5.0, -4.0, 1.5, 1.0),
        ];
        for &(alpha, beta, delta, mu) in &battery {
            let p = NigParams::new(alpha, beta, delta, mu).unwrap();
            let (lo, hi) = integration_window(&p);
            let (mass, mean, second) = integrate_pdf(&p, lo, hi);
            let m = nig_moments(&p);
            assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-6);
            assert_relative_eq!(mean, m.e, max_relative = 1e-4, epsilon = 1e-6);
            let variance = second - mean * mean;
            assert_relative_eq!(variance, m.v, max_relative = 1e-4);
        }
    }

    // -- moments -----------------------------------------------------------

    #[test]
    fn moments_of_symmetric_params_center() {
        let p = NigParams::new(1.7, 0.0, 0.8, 0.0).unwrap();
        let m = nig_moments(&p);
        assert_eq!(m.e, 0.0);
        assert_eq!(m.s, 0.0);
        assert!(m.v > 0.0 && m.k > 0.0);
    }

    #[test]
    fn moments_of_the_example_match_hand_values() {
        let p = example_params();
        let shape = p.shape();
        assert_abs_diff_eq!(shape.zeta, 3.0f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(shape.tau, 1.0 / 3.0f64.sqrt(), epsilon = 1e-15);

        let m = nig_moments(&p);
        // E = 1/√3, V = 4/(3√3), S = 3^{3/4}/2, K = 2√3.
        assert_abs_diff_eq!(m.e, 1.0 / 3.0f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(m.v, 4.0 / (3.0 * 3.0f64.sqrt()), epsilon = 1e-14);
        assert_abs_diff_eq!(m.s, 3.0f64.powf(0.75) / 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(m.k, 2.0 * 3.0f64.sqrt(), epsilon = 1e-14);
        // The five-decimal forms.
        assert_abs_diff_eq!(m.e, 0.57735, epsilon = 1e-5);
        assert_abs_diff_eq!(m.v, 0.76980, epsilon = 1e-5);
        assert_abs_diff_eq!(m.s, 1.13975, epsilon = 1e-5);
        assert_abs_diff_eq!(m.k, 3.46410, epsilon = 1e-5);
    }

    // -- fitting -----------------------------------------------------------

    #[test]
    fn fit_round_trips_the_example() {
        let p = example_params();
        let fitted = fit_nig_moments(&nig_moments(&p)).unwrap();
        assert_relative_eq!(fitted.alpha(), 2.0, max_relative = 1e-9);
        assert_relative_eq!(fitted.beta(), 1.0, max_relative = 1e-9);
        assert_relative_eq!(fitted.delta(), 1.0, max_relative = 1e-9);
        assert_abs_diff_eq!(fitted.mu(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn fit_of_standard_symmetric_moments() {
        let fitted = fit_nig_moments(&MomentVector {
            e: 0.0,
            v: 1.0,
            s: 0.0,
            k: 1.0,
        })
        .unwrap();
        let sqrt3 = 3.0f64.sqrt();
        assert_relative_eq!(fitted.alpha(), sqrt3, max_relative = 1e-12);
        assert_eq!(fitted.beta(), 0.0);
        assert_relative_eq!(fitted.delta(), sqrt3, max_relative = 1e-12);
        assert_eq!(fitted.mu(), 0.0);
        assert_abs_diff_eq!(fitted.shape().zeta, 3.0, epsilon = 1e-12);

        let forward = nig_moments(&fitted);
        assert_abs_diff_eq!(forward.e, 0.0);
        assert_relative_eq!(forward.v, 1.0, max_relative = 1e-12);
        assert_abs_diff_eq!(forward.s, 0.0);
        assert_relative_eq!(forward.k, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn fit_rejects_infeasible_and_gaussian_moments() {
        let err = fit_nig_moments(&MomentVector {
            e: 0.0,
            v: 1.0,
            s: 2.0,
            k: 1.0,
        })
        .unwrap_err();
        assert!(matches!(err, Error::InfeasibleMoments { .. }), "{err}");

        let err = fit_nig_moments(&MomentVector {
            e: 0.0,
            v: 1.0,
            s: 0.0,
            k: 0.0,
        })
        .unwrap_err();
        assert!(matches!(err, Error::GaussianLimit { .. }), "{err}");

        let err = fit_nig_moments(&MomentVector {
            e: 0.0,
            v: 1.0,
            s: 0.0,
            k: -0.5,
        })
        .unwrap_err();
        assert!(matches!(err, Error::GaussianLimit { .. }), "{err}");

        assert!(fit_nig_moments(&MomentVector {
            e: 0.0,
            v: 0.0,
            s: 0.0,
            k: 1.0,
        })
        .is_err());
    }

    /// Blind numerical inversion used to cross-check the closed form: solve
    /// S(τ) = s by bisection with ζ eliminated through the K equation only
    /// (never through the closed-form τ² formula).
    fn fit_by_bisection(m: &MomentVector) -> NigParams {
        let zeta_of = |tau: f64| 3.0 / m.k * (1.0 + 4.0 * tau * tau / (1.0 + tau * tau));
        let skew_of = |tau: f64| 3.0 * tau / (zeta_of(tau) * (1.0 + tau * tau)).sqrt();
        let target = m.s.abs();
        let (mut lo, mut hi) = (0.0f64, 1e9f64);
        assert!(skew_of(hi) > target, "bisection bracket must cover s");
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if skew_of(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let tau = (0.5 * (lo + hi)).copysign(m.s);
        let zeta = zeta_of(tau);
        let delta = (m.v * zeta / (1.0 + tau * tau)).sqrt();
        let mu = m.e - delta * tau;
        let alpha = zeta * (1.0 + tau * tau).sqrt() / delta;
        let beta = zeta * tau / delta;
        NigParams::new(alpha, beta, delta, mu).unwrap()
    }

    #[test]
    fn closed_form_inversion_matches_bruteforce_rootfinding() {
        let mut cases = vec![nig_moments(&example_params())];
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        while cases.len() < 40 {
            let alpha = 0.3 + 6.0 * rng.random::<f64>();
            let beta = alpha * (1.8 * rng.random::<f64>() - 0.9);
            let delta = 0.1 + 3.0 * rng.random::<f64>();
            let mu = 4.0 * rng.random::<f64>() - 2.0;
            let p = NigParams::new(alpha, beta, delta, mu).unwrap();
            let m = nig_moments(&p);
            if m.s != 0.0 {
                cases.push(m);
            }
        }
        for m in &cases {
            let closed = fit_nig_moments(m).unwrap();
            let blind = fit_by_bisection(m);
            assert_relative_eq!(closed.alpha(), blind.alpha(), max_relative = 1e-6);
            assert_relative_eq!(closed.beta(), blind.beta(), max_relative = 1e-6, epsilon = 1e-9);
            assert_relative_eq!(closed.delta(), blind.delta(), max_relative = 1e-6);
            assert_relative_eq!(closed.mu(), blind.mu(), max_relative = 1e-6, epsilon = 1e-9);
        }
    }

    #[test]
    fn sample_fit_recovers_the_example_from_a_large_mixture_sample() {
        // NIG(α, β, δ, μ) is the normal variance-mean mixture
        // X = μ + βZ + √Z·N(0,1) with Z inverse-Gaussian of mean δ/√(α²−β²)
        // and shape δ².
        let (alpha, beta, delta, mu) = (2.0_f64, 1.0_f64, 1.0_f64, 0.0_f64);
        let gamma_bar = (alpha * alpha - beta * beta).sqrt();
        let ig = InverseGaussian::new(delta / gamma_bar, delta * delta).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        let xs: Vec<f64> = (0..1_000_000)
            .map(|_| {
                let z: f64 = ig.sample(&mut rng);
                let n: f64 = StandardNormal.sample(&mut rng);
                mu + beta * z + z.sqrt() * n
            })
            .collect();
        let report = fit_nig_sample(&xs).unwrap();
        assert_relative_eq!(report.params.alpha(), alpha, max_relative = 0.10);
        assert!(!report.unstable, "ζ = {}", report.shape.zeta);
        assert_relative_eq!(report.moments.e, 1.0 / 3.0f64.sqrt(), max_relative = 0.02);

        // Determinism: the same sample fits to the same report.
        assert_eq!(fit_nig_sample(&xs).unwrap(), report);
    }

    #[test]
    fn sample_fit_reports_the_gaussian_limit_on_symmetric_light_tails() {
        // Exactly symmetric sample: s = 0; platykurtic: k < 0.
        let xs = [-3.0, -1.0, 1.0, 3.0, -3.0, -1.0, 1.0, 3.0];
        let err = fit_nig_sample(&xs).unwrap_err();
        assert!(matches!(err, Error::GaussianLimit { .. }), "{err}");
    }

    #[test]
    fn sample_fit_requires_eight_observations() {
        let xs = [0.1, 0.4, -0.2, 0.9, -0.5, 0.3, 0.2];
        assert!(matches!(
            fit_nig_sample(&xs),
            Err(Error::InsufficientData { required: 8, .. })
        ));
    }

    #[test]
    fn near_gaussian_sample_flags_instability() {
        // Tiny positive excess kurtosis with matching skew: feasible but
        // deep in the unstable regime (ζ = 9/(3k − 4s²) huge).
        let m = MomentVector {
            e: 0.0,
            v: 1.0,
            s: 0.0,
            k: 0.001,
        };
        let p = fit_nig_moments(&m).unwrap();
        assert!(p.shape().zeta > ZETA_STABILITY_THRESHOLD);
    }

    proptest! {
        // Round trip B: fit ∘ moments = identity on valid parameters.
        #[test]
        fn fit_inverts_moments(
            alpha in 0.2f64..8.0,
            frac in -0.95f64..0.95,
            delta in 0.05f64..5.0,
            mu in -5.0f64..5.0,
        ) {
            let p = NigParams::new(alpha, alpha * frac, delta, mu).unwrap();
            let fitted = fit_nig_moments(&nig_moments(&p)).unwrap();
            prop_assert!((fitted.alpha() - p.alpha()).abs() <= 1e-9 * p.alpha());
            prop_assert!((fitted.beta() - p.beta()).abs() <= 1e-9 * (1.0 + p.beta().abs()));
            prop_assert!((fitted.delta() - p.delta()).abs() <= 1e-9 * p.delta());
            prop_assert!((fitted.mu() - p.mu()).abs() <= 1e-9 * (1.0 + p.mu().abs()));
        }

        // Round trip A: moments ∘ fit = identity on feasible vectors
        // (generated as images of valid parameters, which is exactly the
        // feasible set).
        #[test]
        fn moments_invert_fit(
            alpha in 0.2f64..8.0,
            frac in -0.95f64..0.95,
            delta in 0.05f64..5.0,
            mu in -5.0f64..5.0,
        ) {
            let m = nig_moments(&NigParams::new(alpha, alpha * frac, delta, mu).unwrap());
            let back = nig_moments(&fit_nig_moments(&m).unwrap());
            prop_assert!((back.e - m.e).abs() <= 1e-9 * (1.0 + m.e.abs()));
            prop_assert!((back.v - m.v).abs() <= 1e-9 * m.v);
            prop_assert!((back.s - m.s).abs() <= 1e-9 * (1.0 + m.s.abs()));
            prop_assert!((back.k - m.k).abs() <= 1e-9 * (1.0 + m.k.abs()));
        }

        // The NIG scaling family: (α/c, β/c, cδ, cμ) rescales E and V and
        // leaves the shape (ζ, τ, S, K) untouched.
        #[test]
        fn scale_family_consistency(
            alpha in 0.2f64..8.0,
            frac in -0.95f64..0.95,
            delta in 0.05f64..5.0,
            mu in -5.0f64..5.0,
            c in 0.1f64..10.0,
        ) {
            let p = NigParams::new(alpha, alpha * frac, delta, mu).unwrap();
            let scaled = NigParams::new(alpha / c, alpha * frac / c, c * delta, c * mu).unwrap();
            let m = nig_moments(&p);
            let ms = nig_moments(&scaled);
            prop_assert!((ms.e - c * m.e).abs() <= 1e-9 * (1.0 + (c * m.e).abs()));
            prop_assert!((ms.v - c * c * m.v).abs() <= 1e-9 * (c * c * m.v));
            prop_assert!((ms.s - m.s).abs() <= 1e-9 * (1.0 + m.s.abs()));
            prop_assert!((ms.k - m.k).abs() <= 1e-9 * (1.0 + m.k.abs()));
        }
    }
}
