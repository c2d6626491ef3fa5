//! Battery orchestration, report assembly, and artifact emission.
//!
//! [`analyze_window`] runs every diagnostic component over one window and
//! records each result — or its structured error — in its own slot, so a
//! failure in one component never suppresses another component's output.
//! Only configuration errors abort an analysis run.
//!
//! [`emit`] writes one schema-versioned JSON report plus three plot-data
//! CSV files per window (tail estimates vs k, the log-log rescaled-range
//! curve, and a sampled fitted density), and is byte-deterministic: the
//! same inputs and configuration produce identical bytes on every run.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, ErrorCategory, Result};
use crate::extrema::{m_test, CalibrationTable, MTestOutcome, SUPPORTED_LEVELS};
use crate::nig::{fit_nig_sample, nig_pdf, NigFitReport};
use crate::rescaled_range::{hurst_estimate, rs_curve, BlockScheme, HurstFit, RsPoint};
use crate::series::{moment_summary, MomentSummary, Series};
use crate::tail::{default_k, k_grid, tail_scan, TailEstimate, TailMethod};

use super::io::{ensure_dir, input_stem, write_file};
use super::windows::{split_crisis, split_half_years, Window};

/// Version stamp carried by the JSON report document.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Number of k values in the tail-scan grid behind the tails plot file.
pub const TAIL_SCAN_POINTS: usize = 12;

/// Number of abscissas in the sampled fitted density plot file.
pub const DENSITY_SAMPLE_POINTS: usize = 201;

/// Half-width of the density sampling window, in fitted standard deviations.
pub const DENSITY_SAMPLE_SPAN: f64 = 6.0;

// ---------------------------------------------------------------------------
// Calibration bundle
// ---------------------------------------------------------------------------

/// A set of calibration tables keyed by sample size.
///
/// `analyze` picks the table whose sample size is nearest (in log scale) to
/// a window's increment count and records the choice in the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationBundle {
    pub schema_version: u32,
    pub tables: Vec<CalibrationTable>,
}

impl CalibrationBundle {
    pub fn new(tables: Vec<CalibrationTable>) -> Result<Self> {
        let bundle = CalibrationBundle {
            schema_version: 1,
            tables,
        };
        bundle.validate()?;
        Ok(bundle)
    }

    /// Checks version, per-table integrity, and distinct ascending sizes.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != 1 {
            return Err(Error::Config {
                reason: format!(
                    "unsupported calibration bundle schema version {}",
                    self.schema_version
                ),
            });
        }
        if self.tables.is_empty() {
            return Err(Error::Config {
                reason: "calibration bundle holds no tables".to_string(),
            });
        }
        for table in &self.tables {
            table.validate()?;
        }
        for pair in self.tables.windows(2) {
            if pair[0].sample_size >= pair[1].sample_size {
                return Err(Error::Config {
                    reason: "calibration tables must have strictly increasing sample sizes"
                        .to_string(),
                });
            }
        }
        Ok(())
    }

    /// The table nearest to `n` by |ln n − ln table size|; ties pick the
    /// smaller table.
    pub fn nearest(&self, n: usize) -> &CalibrationTable {
        let target = (n.max(1) as f64).ln();
        self.tables
            .iter()
            .min_by(|a, b| {
                let da = ((a.sample_size as f64).ln() - target).abs();
                let db = ((b.sample_size as f64).ln() - target).abs();
                da.total_cmp(&db)
                    .then(a.sample_size.cmp(&b.sample_size))
            })
            .expect("validated bundle is nonempty")
    }
}

/// Parses a calibration file that holds either a bundle or a single table.
pub fn parse_calibration(text: &str) -> Result<CalibrationBundle> {
    if let Ok(bundle) = serde_json::from_str::<CalibrationBundle>(text) {
        bundle.validate()?;
        return Ok(bundle);
    }
    let table: CalibrationTable = serde_json::from_str(text).map_err(|e| Error::Config {
        reason: format!("calibration file is neither a bundle nor a table: {e}"),
    })?;
    CalibrationBundle::new(vec![table])
}

/// The calibration bundle shipped with the library.
///
/// Regenerate with `ratediag calibrate --n … --reps … --seed … --out …`.
pub fn bundled_calibration() -> &'static CalibrationBundle {
    static BUNDLE: OnceLock<CalibrationBundle> = OnceLock::new();
    BUNDLE.get_or_init(|| {
        let text = include_str!("../../data/default_calibration.json");
        parse_calibration(text).expect("embedded calibration bundle is valid")
    })
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// Where `analyze` gets its M-test calibration quantiles.
#[derive(Debug, Clone, PartialEq)]
pub enum CalibrationSource {
    /// The bundle shipped with the library.
    Bundled,
    /// A caller-supplied bundle (for example, loaded from `--calibration`).
    Custom(CalibrationBundle),
}

/// Knobs for an analysis run.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConfig {
    /// Two-sided M-test level; must be one of [`SUPPORTED_LEVELS`].
    pub level: f64,
    /// First date of the crisis window.
    pub crisis_date: NaiveDate,
    /// Windows with fewer observations are skipped with a warning.
    pub min_window_obs: usize,
    /// Recorded in the report; reserved for seeded pipeline extensions.
    pub seed: u64,
    pub calibration: CalibrationSource,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            level: 0.05,
            crisis_date: NaiveDate::from_ymd_opt(2008, 8, 1).expect("valid date"),
            min_window_obs: 30,
            seed: 42,
            calibration: CalibrationSource::Bundled,
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<()> {
        if !SUPPORTED_LEVELS.iter().any(|l| (l - self.level).abs() <= 1e-9) {
            return Err(Error::Config {
                reason: format!(
                    "unsupported level {}; supported levels are {:?}",
                    self.level, SUPPORTED_LEVELS
                ),
            });
        }
        if self.min_window_obs < 3 {
            return Err(Error::Config {
                reason: format!(
                    "min_window_obs must be at least 3, got {}",
                    self.min_window_obs
                ),
            });
        }
        Ok(())
    }

    fn bundle(&self) -> &CalibrationBundle {
        match &self.calibration {
            CalibrationSource::Bundled => bundled_calibration(),
            CalibrationSource::Custom(bundle) => bundle,
        }
    }
}

// ---------------------------------------------------------------------------
// Report types
// ---------------------------------------------------------------------------

/// A structured component error: stable machine-readable kind plus message.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorEntry {
    pub kind: String,
    pub message: String,
}

impl ErrorEntry {
    fn from_error(err: &Error) -> Self {
        ErrorEntry {
            kind: err.kind().to_string(),
            message: err.to_string(),
        }
    }
}

/// A component's result or its structured error — exactly one is present.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Slot<T> {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ok: Option<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorEntry>,
}

impl<T> Slot<T> {
    fn from_result(result: Result<T>) -> (Self, Option<Error>) {
        match result {
            Ok(value) => (
                Slot {
                    ok: Some(value),
                    error: None,
                },
                None,
            ),
            Err(err) => (
                Slot {
                    ok: None,
                    error: Some(ErrorEntry::from_error(&err)),
                },
                Some(err),
            ),
        }
    }

    fn error(err: &Error) -> Self {
        Slot {
            ok: None,
            error: Some(ErrorEntry::from_error(err)),
        }
    }

    pub fn as_ok(&self) -> Option<&T> {
        self.ok.as_ref()
    }

    pub fn is_ok(&self) -> bool {
        self.ok.is_some()
    }
}

/// One row of a tail-scan: the estimate at `k`, or why it failed there.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailScanRow {
    pub k: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorEntry>,
}

/// One estimator applied to one tail sample: the default-k estimate plus a
/// log-spaced k-scan for stability plots.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailColumn {
    pub sample_size: usize,
    pub default_k: usize,
    pub estimate: Slot<TailEstimate>,
    pub scan: Vec<TailScanRow>,
}

/// Tail diagnostics: Pickands on the raw increments, Hill on each tail.
///
/// Hill needs positive data, so it sees the positive increments directly
/// and the negated negative increments for the lower tail.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailReport {
    pub pickands: Slot<TailColumn>,
    pub hill_positive: Slot<TailColumn>,
    pub hill_negative: Slot<TailColumn>,
}

/// M-test outcome plus the calibration table that scored it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MTestReport {
    #[serde(flatten)]
    pub outcome: MTestOutcome,
    pub table_sample_size: usize,
    pub table_replications: usize,
    pub table_seed: u64,
}

/// Everything the battery learned about one window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticReport {
    pub label: String,
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub observations: usize,
    pub increments: usize,
    pub warnings: Vec<String>,
    pub moments: Slot<MomentSummary>,
    pub tails: TailReport,
    pub m_test: Slot<MTestReport>,
    pub rs_curve: Slot<Vec<RsPoint>>,
    pub hurst: Slot<HurstFit>,
    pub nig: Slot<NigFitReport>,
}

/// One analyzed input file: its span plus its windows, ordered by label.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputReport {
    pub path: String,
    pub observations: usize,
    pub first_date: NaiveDate,
    pub last_date: NaiveDate,
    pub windows: Vec<DiagnosticReport>,
}

/// Configuration echo embedded in the report for reproducibility.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub level: f64,
    pub crisis_date: NaiveDate,
    pub min_window_obs: usize,
    pub seed: u64,
    pub calibration: String,
}

/// The single machine-readable document produced by an analysis run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub generator: String,
    pub config: ConfigEcho,
    pub inputs: Vec<InputReport>,
}

// ---------------------------------------------------------------------------
// Battery
// ---------------------------------------------------------------------------

/// True for error kinds that double as data-quality warnings.
fn warns(err: &Error) -> bool {
    matches!(
        err,
        Error::AdjacentTie { .. }
            | Error::DegenerateSample { .. }
            | Error::InfeasibleMoments { .. }
            | Error::GaussianLimit { .. }
    )
}

/// Records a component's data-quality finding as a warning line.
fn note(warnings: &mut Vec<String>, component: &str, err: &Option<Error>) {
    if let Some(err) = err {
        if warns(err) {
            warnings.push(format!("{component}: {err}"));
        }
    }
}

/// Builds one estimator column over one tail sample.
fn tail_column(sample: &[f64], method: TailMethod) -> Result<TailColumn> {
    let n = sample.len();
    let min_n = match method {
        TailMethod::Pickands => 4,
        TailMethod::Hill => 2,
    };
    if n < min_n {
        return Err(Error::InsufficientData {
            what: "tail sample",
            required: min_n,
            actual: n,
        });
    }
    let k_default = default_k(n, method);
    let max_k = match method {
        TailMethod::Hill => n - 1,
        TailMethod::Pickands => (n / 4).saturating_sub(1).max(1),
    };
    let lo = if max_k >= 2 { 2 } else { 1 };
    let grid = k_grid(lo.min(max_k), max_k, TAIL_SCAN_POINTS);
    let scan = tail_scan(sample, &grid, method)
        .into_iter()
        .map(|entry| match entry.result {
            Ok(est) => TailScanRow {
                k: entry.k,
                gamma: Some(est.gamma_hat),
                error: None,
            },
            Err(err) => TailScanRow {
                k: entry.k,
                gamma: None,
                error: Some(ErrorEntry::from_error(&err)),
            },
        })
        .collect();

    let estimate = match method {
        TailMethod::Pickands => crate::tail::pickands(sample, k_default),
        TailMethod::Hill => crate::tail::hill(sample, k_default),
    };
    let (estimate, _) = Slot::from_result(estimate);

    Ok(TailColumn {
        sample_size: n,
        default_k: k_default,
        estimate,
        scan,
    })
}

/// A report whose every component is marked skipped with the same reason.
fn skipped_report(window: &Window, reason: Error) -> DiagnosticReport {
    let warning = format!("window skipped: {reason}");
    DiagnosticReport {
        label: window.label.clone(),
        start: window.start,
        end: window.end,
        observations: window.len(),
        increments: window.len().saturating_sub(1),
        warnings: vec![warning],
        moments: Slot::error(&reason),
        tails: TailReport {
            pickands: Slot::error(&reason),
            hill_positive: Slot::error(&reason),
            hill_negative: Slot::error(&reason),
        },
        m_test: Slot::error(&reason),
        rs_curve: Slot::error(&reason),
        hurst: Slot::error(&reason),
        nig: Slot::error(&reason),
    }
}

/// Runs the full diagnostic battery over one window.
///
/// Component failures are recorded in the report; only configuration errors
/// (unsupported level, malformed calibration table) propagate as `Err`.
pub fn analyze_window(
    window: &Window,
    config: &AnalysisConfig,
    table: &CalibrationTable,
) -> Result<DiagnosticReport> {
    if window.len() < config.min_window_obs {
        return Ok(skipped_report(
            window,
            Error::InsufficientData {
                what: "window observations",
                required: config.min_window_obs,
                actual: window.len(),
            },
        ));
    }

    let series = match window.series() {
        Ok(series) => series,
        Err(err) => return Ok(skipped_report(window, err)),
    };
    let increments = series.log_increments();
    let xs: &[f64] = &increments;
    let mut warnings: Vec<String> = Vec::new();

    let (moments, err) = Slot::from_result(moment_summary(xs));
    note(&mut warnings, "moments", &err);

    let positives: Vec<f64> = xs.iter().copied().filter(|x| *x > 0.0).collect();
    let negated_negatives: Vec<f64> = xs.iter().filter(|x| **x < 0.0).map(|x| -x).collect();
    let (pickands_col, err) = Slot::from_result(tail_column(xs, TailMethod::Pickands));
    note(&mut warnings, "pickands", &err);
    let (hill_pos, err) = Slot::from_result(tail_column(&positives, TailMethod::Hill));
    note(&mut warnings, "hill (positive tail)", &err);
    let (hill_neg, err) = Slot::from_result(tail_column(&negated_negatives, TailMethod::Hill));
    note(&mut warnings, "hill (negative tail)", &err);

    let m_test_result = m_test(xs, table, config.level).map(|outcome| MTestReport {
        outcome,
        table_sample_size: table.sample_size,
        table_replications: table.replications,
        table_seed: table.seed,
    });
    if let Err(err) = &m_test_result {
        if err.category() == ErrorCategory::Config {
            return Err(m_test_result.unwrap_err());
        }
    }
    let (m_test_slot, err) = Slot::from_result(m_test_result);
    note(&mut warnings, "m-test", &err);

    let rs_result = rs_curve(xs, BlockScheme::default());
    if let Err(err) = &rs_result {
        if err.category() == ErrorCategory::Config {
            return Err(rs_result.unwrap_err());
        }
    }
    let (rs_slot, err) = Slot::from_result(rs_result);
    note(&mut warnings, "rescaled range", &err);
    if let Some(points) = rs_slot.as_ok() {
        let skipped: usize = points.iter().map(|p| p.blocks_skipped).sum();
        if skipped > 0 {
            warnings.push(format!(
                "rescaled range: {skipped} degenerate block(s) skipped across scales"
            ));
        }
    }
    let hurst_result = match rs_slot.as_ok() {
        Some(points) => hurst_estimate(points),
        None => Err(Error::DegenerateSample {
            reason: "no rescaled-range curve to fit".to_string(),
        }),
    };
    let (hurst_slot, err) = Slot::from_result(hurst_result);
    note(&mut warnings, "hurst", &err);

    let (nig_slot, err) = Slot::from_result(fit_nig_sample(xs));
    note(&mut warnings, "nig", &err);
    if let Some(fit) = nig_slot.as_ok() {
        if fit.unstable {
            warnings.push(
                "nig: fitted shape is near the Gaussian limit; parameters are ill-conditioned"
                    .to_string(),
            );
        }
    }

    Ok(DiagnosticReport {
        label: window.label.clone(),
        start: window.start,
        end: window.end,
        observations: window.len(),
        increments: xs.len(),
        warnings,
        moments,
        tails: TailReport {
            pickands: pickands_col,
            hill_positive: hill_pos,
            hill_negative: hill_neg,
        },
        m_test: m_test_slot,
        rs_curve: rs_slot,
        hurst: hurst_slot,
        nig: nig_slot,
    })
}

/// Analyzes one series: half-year windows plus the crisis split, each run
/// through the battery, ordered by label.
pub fn analyze_series(
    path: &str,
    series: &Series,
    config: &AnalysisConfig,
) -> Result<InputReport> {
    let bundle = config.bundle();
    let mut windows = split_half_years(series);
    let (pre, crisis) = split_crisis(series, config.crisis_date);
    windows.push(pre);
    windows.push(crisis);
    windows.sort_by(|a, b| a.label.cmp(&b.label));

    let mut reports = Vec::with_capacity(windows.len());
    for window in &windows {
        let table = bundle.nearest(window.len().saturating_sub(1).max(1));
        reports.push(analyze_window(window, config, table)?);
    }

    Ok(InputReport {
        path: path.to_string(),
        observations: series.len(),
        first_date: series.first_date(),
        last_date: series.last_date(),
        windows: reports,
    })
}

/// Analyzes a batch of named series into the single run document.
pub fn analyze_inputs(
    inputs: &[(String, Series)],
    config: &AnalysisConfig,
) -> Result<RunReport> {
    config.validate()?;
    config.bundle().validate()?;

    let mut reports = Vec::with_capacity(inputs.len());
    for (path, series) in inputs {
        reports.push(analyze_series(path, series, config)?);
    }

    Ok(RunReport {
        schema_version: REPORT_SCHEMA_VERSION,
        generator: format!("ratediag {}", env!("CARGO_PKG_VERSION")),
        config: ConfigEcho {
            level: config.level,
            crisis_date: config.crisis_date,
            min_window_obs: config.min_window_obs,
            seed: config.seed,
            calibration: match &config.calibration {
                CalibrationSource::Bundled => "bundled".to_string(),
                CalibrationSource::Custom(_) => "custom".to_string(),
            },
        },
        inputs: reports,
    })
}

// ---------------------------------------------------------------------------
// Emission
// ---------------------------------------------------------------------------

/// Serializes the run report as pretty JSON with a trailing newline.
pub fn render_report(run: &RunReport) -> Result<String> {
    let mut text = serde_json::to_string_pretty(run).map_err(|e| Error::Numeric {
        reason: format!("report serialization failed: {e}"),
    })?;
    text.push('\n');
    Ok(text)
}

fn render_tails_csv(report: &DiagnosticReport) -> String {
    let mut ks: BTreeSet<usize> = BTreeSet::new();
    let columns = [
        report.tails.pickands.as_ok(),
        report.tails.hill_positive.as_ok(),
        report.tails.hill_negative.as_ok(),
    ];
    for column in columns.iter().flatten() {
        ks.extend(column.scan.iter().map(|row| row.k));
    }
    let mut text = String::from("k,pickands,hill_positive,hill_negative\n");
    for k in ks {
        let mut cells: Vec<String> = vec![k.to_string()];
        for column in &columns {
            let cell = column
                .and_then(|c| c.scan.iter().find(|row| row.k == k))
                .and_then(|row| row.gamma)
                .map(|g| g.to_string())
                .unwrap_or_default();
            cells.push(cell);
        }
        let _ = writeln!(text, "{}", cells.join(","));
    }
    text
}

fn render_rs_csv(report: &DiagnosticReport) -> String {
    let mut text = String::from("ln_n,ln_rs\n");
    if let Some(points) = report.rs_curve.as_ok() {
        for point in points {
            let _ = writeln!(text, "{},{}", (point.n as f64).ln(), point.rs.ln());
        }
    }
    text
}

fn render_nig_csv(report: &DiagnosticReport) -> String {
    let mut text = String::from("x,density\n");
    if let Some(fit) = report.nig.as_ok() {
        let center = fit.moments.e;
        let spread = fit.moments.v.max(0.0).sqrt();
        if spread > 0.0 && spread.is_finite() {
            let lo = center - DENSITY_SAMPLE_SPAN * spread;
            let hi = center + DENSITY_SAMPLE_SPAN * spread;
            let step = (hi - lo) / (DENSITY_SAMPLE_POINTS - 1) as f64;
            for i in 0..DENSITY_SAMPLE_POINTS {
                let x = lo + step * i as f64;
                if let Ok(density) = nig_pdf(x, &fit.params) {
                    let _ = writeln!(text, "{x},{density}");
                }
            }
        }
    }
    text
}

/// Writes the report document and the per-window plot files under `out_dir`.
///
/// Layout: `out_dir/report.json`, plus for every window of every input
/// `out_dir/<input stem>/<label>_tails.csv`, `<label>_rs.csv`, and
/// `<label>_nig.csv`. Plot files for failed components are header-only, so
/// the file count depends only on the window count. Returns the paths
/// written, report first, in a deterministic order.
pub fn emit(run: &RunReport, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let mut stems: Vec<String> = run.inputs.iter().map(|i| input_stem(Path::new(&i.path))).collect();
    {
        let mut seen = BTreeSet::new();
        for stem in &stems {
            if !seen.insert(stem.clone()) {
                return Err(Error::Config {
                    reason: format!(
                        "two inputs share the plot-directory stem {stem:?}; rename one"
                    ),
                });
            }
        }
    }

    ensure_dir(out_dir)?;
    let mut written = Vec::new();

    let report_path = out_dir.join("report.json");
    write_file(&report_path, &render_report(run)?)?;
    written.push(report_path);

    for (input, stem) in run.inputs.iter().zip(stems.drain(..)) {
        let dir = out_dir.join(&stem);
        ensure_dir(&dir)?;
        for window in &input.windows {
            let tails = dir.join(format!("{}_tails.csv", window.label));
            write_file(&tails, &render_tails_csv(window))?;
            written.push(tails);

            let rs = dir.join(format!("{}_rs.csv", window.label));
            write_file(&rs, &render_rs_csv(window))?;
            written.push(rs);

            let nig = dir.join(format!("{}_nig.csv", window.label));
            write_file(&nig, &render_nig_csv(window))?;
            written.push(nig);
        }
    }

    Ok(written)
}
