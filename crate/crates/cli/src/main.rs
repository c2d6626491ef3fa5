//! `ratediag` — diagnostics for the log-increment structure of positive
//! time series such as currency exchange rates.
//!
//! Subcommands: `analyze` runs the full battery over CSV rate files and
//! writes a JSON report plus plot data; `calibrate` regenerates Monte-Carlo
//! calibration tables for the extrema-gap test; `fit-nig` fits the normal
//! inverse-Gaussian law to one file's log-increments; `simulate` produces
//! synthetic rate files for both supported models.
//!
//! Exit codes: 0 success, 1 data error, 2 configuration/usage error,
//! 3 numeric failure.

mod sim;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Parser, Subcommand, ValueEnum};

use ratediag::pipeline::{
    analyze_inputs, emit, load_series, parse_calibration, AnalysisConfig, CalibrationBundle,
    CalibrationSource, split_crisis, split_half_years,
};
use ratediag::{calibrate, fit_nig_sample, Error, ErrorCategory, NigParams, Result, Series};

use sim::{render_csv, simulate_nig, simulate_samuelson, SamuelsonModel};

#[derive(Parser)]
#[command(name = "ratediag", version, about = "Log-increment diagnostics for positive time series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ReportFormat {
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Model {
    Samuelson,
    Nig,
}

#[derive(Subcommand)]
enum Command {
    /// Run the diagnostic battery over rate files and write report + plot data.
    Analyze {
        /// CSV rate files: `date,value` rows with ISO-8601 dates.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// First day of the crisis window.
        #[arg(long, default_value = "2008-08-01")]
        crisis_date: NaiveDate,
        /// Two-sided level for the extrema-gap test.
        #[arg(long, default_value_t = 0.05)]
        level: f64,
        /// Seed echoed into the report (reserved for seeded extensions).
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Output directory for report.json and per-window plot files.
        #[arg(long, env = "RATEDIAG_OUT", default_value = "ratediag-out")]
        out: PathBuf,
        /// Report format.
        #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
        format: ReportFormat,
        /// Calibration file (bundle or single table) replacing the built-in tables.
        #[arg(long)]
        calibration: Option<PathBuf>,
        /// Minimum observations for a window to enter the battery.
        #[arg(long, default_value_t = 30)]
        min_window_obs: usize,
    },
    /// Monte-Carlo calibrate the extrema-gap statistic for given sample sizes.
    Calibrate {
        /// Sample size; repeat the flag to build a multi-table bundle.
        #[arg(long = "n", required = true)]
        n: Vec<usize>,
        /// Monte-Carlo replications per table.
        #[arg(long, default_value_t = 10_000)]
        reps: usize,
        /// Base seed; table i is generated with seed + i.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the normal inverse-Gaussian law to a file's log-increments.
    FitNig {
        /// CSV rate file.
        input: PathBuf,
        /// Restrict the fit to one window label, e.g. 2004H1 or crisis.
        #[arg(long)]
        window: Option<String>,
        /// Crisis date defining the pre-crisis/crisis window labels.
        #[arg(long, default_value = "2008-08-01")]
        crisis_date: NaiveDate,
    },
    /// Generate a synthetic weekday rate file.
    Simulate {
        /// Log-increment model.
        #[arg(long, value_enum)]
        model: Model,
        /// Number of observations.
        #[arg(long, default_value_t = 2609)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// First observation date (slides to the next weekday if needed).
        #[arg(long, default_value = "2000-01-03")]
        start: NaiveDate,
        /// Initial rate level.
        #[arg(long, default_value_t = 30.0)]
        initial: f64,
        /// Samuelson: per-step drift of the log-increments.
        #[arg(long, default_value_t = 0.0)]
        mu: f64,
        /// Samuelson: per-step standard deviation of the log-increments.
        #[arg(long, default_value_t = 0.01)]
        sigma: f64,
        /// NIG: steepness alpha.
        #[arg(long, default_value_t = 50.0)]
        alpha: f64,
        /// NIG: asymmetry beta.
        #[arg(long, default_value_t = 0.0)]
        beta: f64,
        /// NIG: scale delta.
        #[arg(long, default_value_t = 0.005)]
        delta: f64,
        /// NIG: location of the increments.
        #[arg(long, default_value_t = 0.0)]
        location: f64,
        /// Output CSV path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_or_print(out: Option<&Path>, contents: &str) -> Result<()> {
    match out {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent).map_err(|source| Error::Io {
                    path: parent.to_path_buf(),
                    source,
                })?;
            }
            fs::write(path, contents).map_err(|source| Error::Io {
                path: path.to_path_buf(),
                source,
            })
        }
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn run_analyze(
    inputs: &[PathBuf],
    crisis_date: NaiveDate,
    level: f64,
    seed: u64,
    out: &Path,
    calibration: Option<&Path>,
    min_window_obs: usize,
) -> Result<()> {
    let calibration = match calibration {
        Some(path) => CalibrationSource::Custom(parse_calibration(&read_to_string(path)?)?),
        None => CalibrationSource::Bundled,
    };
    let config = AnalysisConfig {
        level,
        crisis_date,
        min_window_obs,
        seed,
        calibration,
    };

    let mut series: Vec<(String, Series)> = Vec::with_capacity(inputs.len());
    for path in inputs {
        series.push((path.display().to_string(), load_series(path)?));
    }
    let run = analyze_inputs(&series, &config)?;
    let written = emit(&run, out)?;

    println!("report: {}", written[0].display());
    println!("plot-data files: {}", written.len() - 1);
    for input in &run.inputs {
        let windows = input.windows.len();
        let skipped = input
            .windows
            .iter()
            .filter(|w| w.warnings.iter().any(|msg| msg.starts_with("window skipped:")))
            .count();
        println!(
            "{}: {} windows analyzed ({} skipped as too short)",
            input.path, windows, skipped
        );
    }
    Ok(())
}

fn run_calibrate(n: &[usize], reps: usize, seed: u64, out: Option<&Path>) -> Result<()> {
    let mut sizes = n.to_vec();
    sizes.sort_unstable();
    sizes.dedup();

    let mut tables = Vec::with_capacity(sizes.len());
    for (i, &size) in sizes.iter().enumerate() {
        tables.push(calibrate(size, reps, seed.wrapping_add(i as u64))?);
    }

    let mut text = if tables.len() == 1 {
        serde_json::to_string_pretty(&tables[0])
    } else {
        let bundle = CalibrationBundle::new(tables)?;
        serde_json::to_string_pretty(&bundle)
    }
    .map_err(|e| Error::Numeric {
        reason: format!("calibration serialization failed: {e}"),
    })?;
    text.push('\n');
    write_or_print(out, &text)?;
    if let Some(path) = out {
        eprintln!("calibration written to {}", path.display());
    }
    Ok(())
}

fn run_fit_nig(input: &Path, window: Option<&str>, crisis_date: NaiveDate) -> Result<()> {
    let series = load_series(input)?;
    let (label, sub) = match window {
        None => (None, series.clone()),
        Some(label) => {
            let mut windows = split_half_years(&series);
            let (pre, crisis) = split_crisis(&series, crisis_date);
            windows.push(pre);
            windows.push(crisis);
            let found = windows.iter().find(|w| w.label == label).ok_or_else(|| {
                let mut labels: Vec<String> =
                    windows.iter().map(|w| w.label.clone()).collect();
                labels.sort();
                Error::Config {
                    reason: format!(
                        "window {label:?} not found; available windows: {}",
                        labels.join(", ")
                    ),
                }
            })?;
            (Some(found.label.clone()), found.series()?)
        }
    };

    let increments = sub.log_increments();
    let report = fit_nig_sample(&increments)?;
    let document = serde_json::json!({
        "input": input.display().to_string(),
        "window": label,
        "increments": increments.len(),
        "fit": report,
    });
    println!(
        "{}",
        serde_json::to_string_pretty(&document).map_err(|e| Error::Numeric {
            reason: format!("fit serialization failed: {e}"),
        })?
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_simulate(
    model: Model,
    n: usize,
    seed: u64,
    start: NaiveDate,
    initial: f64,
    mu: f64,
    sigma: f64,
    alpha: f64,
    beta: f64,
    delta: f64,
    location: f64,
    out: Option<&Path>,
) -> Result<()> {
    let rows = match model {
        Model::Samuelson => {
            simulate_samuelson(SamuelsonModel { mu, sigma }, n, start, initial, seed)?
        }
        Model::Nig => {
            let params = NigParams::new(alpha, beta, delta, location).map_err(|e| {
                Error::Config {
                    reason: format!("invalid NIG parameters: {e}"),
                }
            })?;
            simulate_nig(&params, n, start, initial, seed)?
        }
    };
    write_or_print(out, &render_csv(&rows))?;
    if let Some(path) = out {
        eprintln!("{} observations written to {}", rows.len(), path.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Analyze {
            inputs,
            crisis_date,
            level,
            seed,
            out,
            format: ReportFormat::Json,
            calibration,
            min_window_obs,
        } => run_analyze(
            &inputs,
            crisis_date,
            level,
            seed,
            &out,
            calibration.as_deref(),
            min_window_obs,
        ),
        Command::Calibrate { n, reps, seed, out } => {
            run_calibrate(&n, reps, seed, out.as_deref())
        }
        Command::FitNig {
            input,
            window,
            crisis_date,
        } => run_fit_nig(&input, window.as_deref(), crisis_date),
        Command::Simulate {
            model,
            n,
            seed,
            start,
            initial,
            mu,
            sigma,
            alpha,
            beta,
            delta,
            location,
            out,
        } => run_simulate(
            model, n, seed, start, initial, mu, sigma, alpha, beta, delta, location,
            out.as_deref(),
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            let code = match err.category() {
                ErrorCategory::Data => 1,
                ErrorCategory::Config => 2,
                ErrorCategory::Numeric => 3,
            };
            ExitCode::from(code)
        }
    }
}
