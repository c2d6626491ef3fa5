//! End-to-end analysis pipeline: CSV ingestion, calendar windowing, the
//! per-window diagnostic battery, and deterministic artifact emission.
//!
//! The flow is `load_series` → `split_half_years` / `split_crisis` →
//! `analyze_window` per window → one JSON run report plus three plot-data
//! CSV files per window via `emit`. Component failures inside a window are
//! captured as structured errors in that window's report; only
//! configuration errors abort a run.

pub mod io;
pub mod report;
pub mod windows;

pub use io::{input_stem, load_series};
pub use report::{
    analyze_inputs, analyze_series, analyze_window, bundled_calibration, emit,
    parse_calibration, render_report, AnalysisConfig, CalibrationBundle, CalibrationSource,
    ConfigEcho, DiagnosticReport, ErrorEntry, InputReport, MTestReport, RunReport, Slot,
    TailColumn, TailReport, TailScanRow, DENSITY_SAMPLE_POINTS, DENSITY_SAMPLE_SPAN,
    REPORT_SCHEMA_VERSION, TAIL_SCAN_POINTS,
};
pub use windows::{split_crisis, split_half_years, Window};
