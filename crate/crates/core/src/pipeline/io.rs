//! CSV ingestion and file-writing helpers.
//!
//! Input files are two-column CSV `date,value` with ISO-8601 dates, one
//! observation per working day. A header line is optional and autodetected:
//! if the first field of the first non-empty line does not parse as a date,
//! that line is treated as a header. Values must be strictly positive and
//! finite; dates must be strictly increasing. Violations are reported with
//! the 1-based line number.

use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::series::{Series, SeriesPoint};

fn parse_date(text: &str) -> Option<NaiveDate> {
    NaiveDate::parse_from_str(text.trim(), "%Y-%m-%d").ok()
}

/// Loads and validates a positive time series from a CSV file.
pub fn load_series(path: &Path) -> Result<Series> {
    let file = fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let reader = BufReader::new(file);

    let mut points: Vec<SeriesPoint> = Vec::new();
    let mut saw_any_content = false;
    for (index, line) in reader.lines().enumerate() {
        let line_no = index + 1;
        let line = line.map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() {
            continue;
        }

        let Some((date_text, value_text)) = line.split_once(',') else {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: line_no,
                reason: format!("expected `date,value`, got {line:?}"),
            });
        };

        let Some(date) = parse_date(date_text) else {
            // An unparseable date on the first content line is a header.
            if !saw_any_content {
                saw_any_content = true;
                continue;
            }
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: line_no,
                reason: format!("invalid ISO-8601 date {:?}", date_text.trim()),
            });
        };
        saw_any_content = true;

        let value: f64 = value_text.trim().parse().map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            line: line_no,
            reason: format!("invalid number {:?}", value_text.trim()),
        })?;
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::NonPositiveValue {
                path: path.to_path_buf(),
                line: line_no,
                value,
            });
        }
        if let Some(prev) = points.last() {
            if date == prev.date {
                return Err(Error::DuplicateDate {
                    path: path.to_path_buf(),
                    line: line_no,
                    date,
                });
            }
            if date < prev.date {
                return Err(Error::UnsortedDates {
                    path: path.to_path_buf(),
                    line: line_no,
                    date,
                    prev: prev.date,
                });
            }
        }
        points.push(SeriesPoint { date, value });
    }

    if points.len() < 2 {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: points.len(),
            reason: format!(
                "a series needs at least 2 observations, found {}",
                points.len()
            ),
        });
    }
    // Every per-point invariant was enforced above, so this cannot fail;
    // route any surprise through the same error type all the same.
    Series::new(points)
}

/// Writes a file, attaching the path to any I/O failure.
pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Creates a directory (and parents), attaching the path to any failure.
pub fn ensure_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// The file stem used to name an input's plot-data directory.
pub fn input_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "input".to_string())
}

/// Convenience used by the CLI: `path` as given plus its stem.
pub fn display_path(path: &Path) -> String {
    path.to_string_lossy().into_owned()
}

#[allow(unused)]
pub fn to_path(s: &str) -> PathBuf {
    PathBuf::from(s)
}
