//! Calendar windowing: half-year partitions and a crisis split.
//!
//! Half-year windows are calendar windows — H1 is January 1 through June 30,
//! H2 is July 1 through December 31 — intersected with the data span, so a
//! series running 2000-01-01..2009-12-31 yields exactly the twenty windows
//! 2000H1..2009H2. Working-day gaps (weekends, holidays) are ignored:
//! observations are consecutive by position, not by calendar distance.
//!
//! The crisis split cuts the sample at a configurable date: the pre-crisis
//! window holds everything strictly before the cut, the crisis window holds
//! everything from the cut onward.

use chrono::{Datelike, NaiveDate};

use crate::error::Result;
use crate::series::{Series, SeriesPoint};

/// A labeled, dated slice of a series.
///
/// `start`/`end` are the window's calendar bounds (inclusive); every point's
/// date lies inside them. A window may hold fewer points than a valid
/// [`Series`] requires — the analysis battery skips such windows with a
/// warning rather than erroring.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub label: String,
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub points: Vec<SeriesPoint>,
}

impl Window {
    /// The window's observations as a standalone [`Series`].
    pub fn series(&self) -> Result<Series> {
        Series::new(self.points.clone())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn ymd(year: i32, month: u32, day: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(year, month, day).expect("valid calendar date")
}

/// Splits a series into calendar half-year windows intersecting its span.
///
/// Every observation lands in exactly one window; windows are returned in
/// chronological (equivalently, label) order. Windows are emitted even when
/// they contain few or no observations — the battery applies its own
/// minimum-size rule.
pub fn split_half_years(series: &Series) -> Vec<Window> {
    let first = series.first_date();
    let last = series.last_date();
    let points = series.points();

    let mut windows = Vec::new();
    for year in first.year()..=last.year() {
        let halves = [
            (1, ymd(year, 1, 1), ymd(year, 6, 30)),
            (2, ymd(year, 7, 1), ymd(year, 12, 31)),
        ];
        for (half, start, end) in halves {
            if end < first || start > last {
                continue;
            }
            let lo = points.partition_point(|p| p.date < start);
            let hi = points.partition_point(|p| p.date <= end);
            windows.push(Window {
                label: format!("{year}H{half}"),
                start,
                end,
                points: points[lo..hi].to_vec(),
            });
        }
    }
    windows
}

/// Splits a series at `crisis_start` into (pre-crisis, crisis) windows.
///
/// The pre-crisis window holds observations strictly before `crisis_start`;
/// the crisis window holds observations on or after it. Both windows are
/// always returned; one may be empty when the cut falls outside the span.
pub fn split_crisis(series: &Series, crisis_start: NaiveDate) -> (Window, Window) {
    let points = series.points();
    let cut = points.partition_point(|p| p.date < crisis_start);
    let pre_end = crisis_start
        .pred_opt()
        .expect("crisis date has a predecessor");

    let pre = Window {
        label: "pre-crisis".to_string(),
        start: series.first_date().min(pre_end),
        end: pre_end,
        points: points[..cut].to_vec(),
    };
    let crisis = Window {
        label: "crisis".to_string(),
        start: crisis_start,
        end: series.last_date().max(crisis_start),
        points: points[cut..].to_vec(),
    };
    (pre, crisis)
}
