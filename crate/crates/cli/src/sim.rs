//! Synthetic rate-series generators for the `simulate` subcommand.
//!
//! Both models exponentiate i.i.d. log-increments onto an initial level:
//! `samuelson` draws Gaussian increments, `nig` draws normal
//! inverse-Gaussian increments via the standard inverse-Gaussian variance
//! mixture. Observations land on consecutive weekdays.

use chrono::{Datelike, NaiveDate, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, InverseGaussian, StandardNormal};

use ratediag::{Error, NigParams, Result};

/// Parameters of the Gaussian log-increment model.
#[derive(Debug, Clone, Copy)]
pub struct SamuelsonModel {
    pub mu: f64,
    pub sigma: f64,
}

/// Advances to the next weekday on or after `date`.
fn next_weekday(mut date: NaiveDate) -> NaiveDate {
    while matches!(date.weekday(), Weekday::Sat | Weekday::Sun) {
        date = date.succ_opt().expect("date range");
    }
    date
}

fn build_series(
    start: NaiveDate,
    initial: f64,
    increments: impl Iterator<Item = f64>,
) -> Vec<(NaiveDate, f64)> {
    let mut rows = Vec::new();
    let mut date = next_weekday(start);
    let mut value = initial;
    rows.push((date, value));
    for x in increments {
        date = next_weekday(date.succ_opt().expect("date range"));
        value *= x.exp();
        rows.push((date, value));
    }
    rows
}

/// `n` weekday observations of a geometric random walk with Gaussian
/// log-increments.
pub fn simulate_samuelson(
    model: SamuelsonModel,
    n: usize,
    start: NaiveDate,
    initial: f64,
    seed: u64,
) -> Result<Vec<(NaiveDate, f64)>> {
    if n < 2 {
        return Err(Error::Config {
            reason: format!("simulate needs n >= 2, got {n}"),
        });
    }
    if !(initial.is_finite() && initial > 0.0) {
        return Err(Error::Config {
            reason: format!("initial level must be positive, got {initial}"),
        });
    }
    if !(model.sigma.is_finite() && model.sigma > 0.0) || !model.mu.is_finite() {
        return Err(Error::Config {
            reason: format!(
                "samuelson model needs finite mu and positive sigma, got mu = {}, sigma = {}",
                model.mu, model.sigma
            ),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws = (0..n - 1).map(move |_| {
        let z: f64 = rng.sample(StandardNormal);
        model.mu + model.sigma * z
    });
    Ok(build_series(start, initial, draws))
}

/// `n` weekday observations of a geometric random walk with normal
/// inverse-Gaussian log-increments.
pub fn simulate_nig(
    params: &NigParams,
    n: usize,
    start: NaiveDate,
    initial: f64,
    seed: u64,
) -> Result<Vec<(NaiveDate, f64)>> {
    if n < 2 {
        return Err(Error::Config {
            reason: format!("simulate needs n >= 2, got {n}"),
        });
    }
    if !(initial.is_finite() && initial > 0.0) {
        return Err(Error::Config {
            reason: format!("initial level must be positive, got {initial}"),
        });
    }
    let alpha = params.alpha();
    let beta = params.beta();
    let delta = params.delta();
    let mu = params.mu();
    let gamma_bar = (alpha * alpha - beta * beta).sqrt();
    let mixing = InverseGaussian::new(delta / gamma_bar, delta * delta).map_err(|e| {
        Error::Config {
            reason: format!("inverse-Gaussian mixing law rejected the parameters: {e}"),
        }
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws = (0..n - 1).map(move |_| {
        let z: f64 = mixing.sample(&mut rng);
        let g: f64 = rng.sample(StandardNormal);
        mu + beta * z + z.sqrt() * g
    });
    Ok(build_series(start, initial, draws))
}

/// Renders simulated rows as the CSV dialect `analyze` reads.
pub fn render_csv(rows: &[(NaiveDate, f64)]) -> String {
    let mut text = String::from("date,value\n");
    for (date, value) in rows {
        text.push_str(&format!("{date},{value}\n"));
    }
    text
}
