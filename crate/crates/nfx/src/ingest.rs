//! Loading, windowing, and validating per-asset daily metric series.
//!
//! Inputs are one CSV per asset in the vendor export convention: a header
//! row with an ISO-8601 `time` column plus metric columns named exactly
//! `PriceUSD`, `TxTfrValAdjUSD`, `AdrBalCnt`, `AdrActCnt`, and optionally
//! `6MAdrActCnt`. Empty cells are missing values; unknown columns are
//! ignored; a metric column that is absent altogether loads as all-missing.
//!
//! The asset roster (symbol, file path, date window) lives in a TOML config
//! file with one `[[asset]]` block per asset, so per-asset start trimming is
//! data rather than code.
//!
//! Interior date gaps are an error by default because daily deltas are
//! meaningless across silent gaps; `fill_gaps` inserts explicit all-missing
//! rows instead, which downstream classification marks `Undefined`.

use chrono::NaiveDate;
use serde::Deserialize;
use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};
use thiserror::Error;

use crate::classify::{UserProxy, ValueProxy};

/// Per-asset entry of the run configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssetConfig {
    /// Short symbol, e.g. `BTC`; unique within a run.
    pub asset_id: String,
    /// CSV file with the asset's daily metrics.
    pub source_path: PathBuf,
    /// First day of the study window (inclusive).
    pub start_date: NaiveDate,
    /// Last day of the study window (inclusive); `None` = end of file.
    pub end_date: Option<NaiveDate>,
    /// Optional transfer-event log used to derive user-base columns that
    /// the metric CSV does not carry.
    pub events_path: Option<PathBuf>,
}

/// Daily metric series for one asset over a contiguous date range.
///
/// All columns have the same length as `dates`; `None` marks a missing
/// observation. `six_m_adr_act_cnt` is `None` when the input had no such
/// column at all (as opposed to a present column with missing cells).
#[derive(Debug, Clone, PartialEq)]
pub struct AssetSeries {
    pub asset_id: String,
    /// Strictly increasing, gap-free calendar days.
    pub dates: Vec<NaiveDate>,
    pub price_usd: Vec<Option<f64>>,
    pub tx_tfr_val_adj_usd: Vec<Option<f64>>,
    pub adr_bal_cnt: Vec<Option<f64>>,
    pub adr_act_cnt: Vec<Option<f64>>,
    pub six_m_adr_act_cnt: Option<Vec<Option<f64>>>,
}

impl AssetSeries {
    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    /// Column housing the given value proxy.
    pub fn value_column(&self, proxy: ValueProxy) -> &[Option<f64>] {
        match proxy {
            ValueProxy::TokenPrice => &self.price_usd,
            ValueProxy::TransactionValue => &self.tx_tfr_val_adj_usd,
        }
    }

    /// Column housing the given user proxy; `None` when the trailing-window
    /// active count is neither present in the input nor derived.
    pub fn user_column(&self, proxy: UserProxy) -> Option<&[Option<f64>]> {
        match proxy {
            UserProxy::NonZeroBalanceAddresses => Some(&self.adr_bal_cnt),
            UserProxy::SixMonthActiveAddresses => self.six_m_adr_act_cnt.as_deref(),
        }
    }

    /// Serialize back to the input CSV convention. Floats are printed in
    /// shortest round-trip form, so `parse_series` on the output reproduces
    /// the series exactly.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("time,PriceUSD,TxTfrValAdjUSD,AdrBalCnt,AdrActCnt");
        if self.six_m_adr_act_cnt.is_some() {
            out.push_str(",6MAdrActCnt");
        }
        out.push('\n');
        let fmt_cell = |c: &Option<f64>| c.map(|v| v.to_string()).unwrap_or_default();
        for i in 0..self.len() {
            out.push_str(&self.dates[i].to_string());
            for col in [
                &self.price_usd,
                &self.tx_tfr_val_adj_usd,
                &self.adr_bal_cnt,
                &self.adr_act_cnt,
            ] {
                out.push(',');
                out.push_str(&fmt_cell(&col[i]));
            }
            if let Some(col) = &self.six_m_adr_act_cnt {
                out.push(',');
                out.push_str(&fmt_cell(&col[i]));
            }
            out.push('\n');
        }
        out
    }
}

/// Parsing knobs beyond the per-asset config.
#[derive(Debug, Clone, Default)]
pub struct ParseOptions {
    /// Insert all-missing rows for interior date gaps instead of failing.
    pub fill_gaps: bool,
}

/// Errors raised while loading configs or series.
#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: no `time` column in header")]
    MissingTimeColumn { path: PathBuf },
    #[error("{path}: row {row}: {detail}")]
    MalformedRow {
        path: PathBuf,
        /// 1-based data row number (header excluded).
        row: usize,
        detail: String,
    },
    #[error("asset `{asset}`: duplicate date {date}")]
    DuplicateDate { asset: String, date: NaiveDate },
    #[error("asset `{asset}`: dates jump from {prev} to {next}; use fill-gaps to insert missing rows")]
    NonContiguousDates {
        asset: String,
        prev: NaiveDate,
        next: NaiveDate,
    },
    #[error("asset `{asset}`: no rows inside window {start}..{end}", end = .end.map(|d| d.to_string()).unwrap_or_else(|| "eof".into()))]
    EmptyWindow {
        asset: String,
        start: NaiveDate,
        end: Option<NaiveDate>,
    },
    #[error("config {path}: {detail}")]
    ConfigParse { path: PathBuf, detail: String },
    #[error("config: duplicate asset `{asset}`")]
    DuplicateAsset { asset: String },
    #[error("config: asset `{asset}`: start {start} is after end {end}")]
    InvalidWindow {
        asset: String,
        start: NaiveDate,
        end: NaiveDate,
    },
}

#[derive(Debug, Deserialize)]
struct RawConfig {
    #[serde(default)]
    asset: Vec<RawAsset>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAsset {
    symbol: String,
    path: String,
    start: String,
    end: Option<String>,
    events: Option<String>,
}

fn parse_config_date(path: &Path, asset: &str, key: &str, s: &str) -> Result<NaiveDate, IngestError> {
    s.parse::<NaiveDate>().map_err(|e| IngestError::ConfigParse {
        path: path.to_path_buf(),
        detail: format!("asset `{asset}`: bad {key} date `{s}`: {e}"),
    })
}

/// Load the asset roster from a TOML config file.
///
/// Relative `path`/`events` entries are resolved against the config file's
/// own directory, so a config and its data can move together.
pub fn load_config(path: &Path) -> Result<Vec<AssetConfig>, IngestError> {
    let text = std::fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let raw: RawConfig = toml::from_str(&text).map_err(|e| IngestError::ConfigParse {
        path: path.to_path_buf(),
        detail: e.to_string(),
    })?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let resolve = |p: &str| {
        let p = Path::new(p);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            base.join(p)
        }
    };

    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(raw.asset.len());
    for a in &raw.asset {
        if a.symbol.is_empty() {
            return Err(IngestError::ConfigParse {
                path: path.to_path_buf(),
                detail: "asset with empty symbol".into(),
            });
        }
        if !seen.insert(a.symbol.clone()) {
            return Err(IngestError::DuplicateAsset {
                asset: a.symbol.clone(),
            });
        }
        let start_date = parse_config_date(path, &a.symbol, "start", &a.start)?;
        let end_date = a
            .end
            .as_deref()
            .map(|s| parse_config_date(path, &a.symbol, "end", s))
            .transpose()?;
        if let Some(end) = end_date {
            if start_date > end {
                return Err(IngestError::InvalidWindow {
                    asset: a.symbol.clone(),
                    start: start_date,
                    end,
                });
            }
        }
        out.push(AssetConfig {
            asset_id: a.symbol.clone(),
            source_path: resolve(&a.path),
            start_date,
            end_date,
            events_path: a.events.as_deref().map(resolve),
        });
    }
    Ok(out)
}

/// Accepted timestamp shapes for the `time` column, tried in order.
fn parse_time_cell(s: &str) -> Option<NaiveDate> {
    if let Ok(d) = s.parse::<NaiveDate>() {
        return Some(d);
    }
    if let Ok(dt) = chrono::DateTime::parse_from_rfc3339(s) {
        return Some(dt.date_naive());
    }
    if let Ok(dt) = chrono::NaiveDateTime::parse_from_str(s, "%Y-%m-%d %H:%M:%S") {
        return Some(dt.date());
    }
    None
}

fn parse_metric_cell(s: &str) -> Result<Option<f64>, String> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(None);
    }
    let v: f64 = s.parse().map_err(|_| format!("unparseable number `{s}`"))?;
    if !v.is_finite() {
        return Err(format!("non-finite number `{s}`"));
    }
    Ok(Some(v))
}

/// Surface I/O failures (missing file, read fault) as [`IngestError::Io`]
/// even when the CSV reader wrapped them, so callers can tell "file broken"
/// from "file unreadable".
fn csv_error(path: &Path, source: csv::Error) -> IngestError {
    let path = path.to_path_buf();
    if !source.is_io_error() {
        return IngestError::Csv { path, source };
    }
    match source.into_kind() {
        csv::ErrorKind::Io(source) => IngestError::Io { path, source },
        _ => unreachable!("is_io_error checked the kind"),
    }
}

/// Parse one asset CSV and window it to `[start_date, end_date]`.
///
/// Rows are sorted by date before windowing, duplicates are rejected over
/// the whole file, and the surviving window must be gap-free unless
/// `options.fill_gaps` asks for explicit missing rows.
pub fn parse_series(
    path: &Path,
    config: &AssetConfig,
    options: &ParseOptions,
) -> Result<AssetSeries, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_path(path)
        .map_err(|source| csv_error(path, source))?;

    let headers = reader
        .headers()
        .map_err(|source| csv_error(path, source))?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let time_idx = col("time").ok_or_else(|| IngestError::MissingTimeColumn {
        path: path.to_path_buf(),
    })?;
    let metric_idx = [
        col(ValueProxy::TokenPrice.column_name()),
        col(ValueProxy::TransactionValue.column_name()),
        col(UserProxy::NonZeroBalanceAddresses.column_name()),
        col("AdrActCnt"),
        col(UserProxy::SixMonthActiveAddresses.column_name()),
    ];

    // (date, [price, txval, balcnt, actcnt, act6m])
    let mut rows: Vec<(NaiveDate, [Option<f64>; 5])> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|source| csv_error(path, source))?;
        let time_cell = record.get(time_idx).unwrap_or("");
        let date = parse_time_cell(time_cell).ok_or_else(|| IngestError::MalformedRow {
            path: path.to_path_buf(),
            row,
            detail: format!("unparseable time `{time_cell}`"),
        })?;
        let mut cells = [None; 5];
        for (slot, idx) in cells.iter_mut().zip(metric_idx) {
            if let Some(idx) = idx {
                *slot = parse_metric_cell(record.get(idx).unwrap_or("")).map_err(|detail| {
                    IngestError::MalformedRow {
                        path: path.to_path_buf(),
                        row,
                        detail,
                    }
                })?;
            }
        }
        rows.push((date, cells));
    }

    rows.sort_by_key(|(d, _)| *d);
    for w in rows.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(IngestError::DuplicateDate {
                asset: config.asset_id.clone(),
                date: w[0].0,
            });
        }
    }

    let end = config.end_date.unwrap_or(NaiveDate::MAX);
    rows.retain(|(d, _)| *d >= config.start_date && *d <= end);
    if rows.is_empty() {
        return Err(IngestError::EmptyWindow {
            asset: config.asset_id.clone(),
            start: config.start_date,
            end: config.end_date,
        });
    }

    let has_six_m = metric_idx[4].is_some();
    let mut series = AssetSeries {
        asset_id: config.asset_id.clone(),
        dates: Vec::with_capacity(rows.len()),
        price_usd: Vec::with_capacity(rows.len()),
        tx_tfr_val_adj_usd: Vec::with_capacity(rows.len()),
        adr_bal_cnt: Vec::with_capacity(rows.len()),
        adr_act_cnt: Vec::with_capacity(rows.len()),
        six_m_adr_act_cnt: has_six_m.then(|| Vec::with_capacity(rows.len())),
    };
    let push = |date: NaiveDate, cells: [Option<f64>; 5], series: &mut AssetSeries| {
        series.dates.push(date);
        series.price_usd.push(cells[0]);
        series.tx_tfr_val_adj_usd.push(cells[1]);
        series.adr_bal_cnt.push(cells[2]);
        series.adr_act_cnt.push(cells[3]);
        if let Some(col) = &mut series.six_m_adr_act_cnt {
            col.push(cells[4]);
        }
    };

    let mut prev: Option<NaiveDate> = None;
    for (date, cells) in rows {
        if let Some(p) = prev {
            let mut expect = p.succ_opt().expect("date overflow");
            if date != expect && !options.fill_gaps {
                return Err(IngestError::NonContiguousDates {
                    asset: config.asset_id.clone(),
                    prev: p,
                    next: date,
                });
            }
            while expect < date {
                push(expect, [None; 5], &mut series);
                expect = expect.succ_opt().expect("date overflow");
            }
        }
        push(date, cells, &mut series);
        prev = Some(date);
    }
    Ok(series)
}

/// Kind of data problem surfaced by [`validate_series`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IssueKind {
    /// Empty cells in a present column.
    Missing,
    /// Zero observations (log returns across them are undefined).
    Zero,
    /// Negative observations; fatal, the metrics are nonnegative by
    /// definition.
    Negative,
    /// Trailing-window active count below the same day's daily count.
    WindowBelowDaily,
}

impl fmt::Display for IssueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            IssueKind::Missing => "missing value",
            IssueKind::Zero => "zero value",
            IssueKind::Negative => "negative value",
            IssueKind::WindowBelowDaily => "window count below daily count",
        };
        f.write_str(s)
    }
}

/// One validation finding: a problem kind, the column it affects, how many
/// days show it, and when it first occurs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationIssue {
    pub column: &'static str,
    pub kind: IssueKind,
    pub count: usize,
    pub first_date: NaiveDate,
    pub fatal: bool,
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} ({} day{}, first {}){}",
            self.kind,
            self.column,
            self.count,
            if self.count == 1 { "" } else { "s" },
            self.first_date,
            if self.fatal { " [fatal]" } else { "" },
        )
    }
}

/// Inspect a series and report missing, zero, and negative observations per
/// column, plus cross-column consistency of the trailing-window count.
/// Purely observational; the input is never mutated.
pub fn validate_series(series: &AssetSeries) -> Vec<ValidationIssue> {
    let mut issues = Vec::new();
    let columns: [(&'static str, Option<&[Option<f64>]>); 5] = [
        ("price_usd", Some(&series.price_usd)),
        ("tx_tfr_val_adj_usd", Some(&series.tx_tfr_val_adj_usd)),
        ("adr_bal_cnt", Some(&series.adr_bal_cnt)),
        ("adr_act_cnt", Some(&series.adr_act_cnt)),
        ("six_m_adr_act_cnt", series.six_m_adr_act_cnt.as_deref()),
    ];
    for (name, col) in columns {
        let Some(col) = col else { continue };
        let mut scan = |kind: IssueKind, fatal: bool, pred: &dyn Fn(&Option<f64>) -> bool| {
            let count = col.iter().filter(|c| pred(c)).count();
            if count > 0 {
                let first = col.iter().position(pred).unwrap();
                issues.push(ValidationIssue {
                    column: name,
                    kind,
                    count,
                    first_date: series.dates[first],
                    fatal,
                });
            }
        };
        scan(IssueKind::Missing, false, &|c| c.is_none());
        scan(IssueKind::Zero, false, &|c| *c == Some(0.0));
        scan(IssueKind::Negative, true, &|c| matches!(c, Some(v) if *v < 0.0));
    }
    if let Some(six_m) = &series.six_m_adr_act_cnt {
        let below = |i: usize| match (six_m[i], series.adr_act_cnt[i]) {
            (Some(w), Some(d)) => w < d,
            _ => false,
        };
        let count = (0..series.len()).filter(|&i| below(i)).count();
        if count > 0 {
            let first = (0..series.len()).find(|&i| below(i)).unwrap();
            issues.push(ValidationIssue {
                column: "six_m_adr_act_cnt",
                kind: IssueKind::WindowBelowDaily,
                count,
                first_date: series.dates[first],
                fatal: false,
            });
        }
    }
    issues
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn cfg(asset: &str, start: &str, end: Option<&str>) -> AssetConfig {
        AssetConfig {
            asset_id: asset.to_string(),
            source_path: PathBuf::new(),
            start_date: start.parse().unwrap(),
            end_date: end.map(|e| e.parse().unwrap()),
            events_path: None,
        }
    }

    fn write_csv(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    const HEADER: &str = "time,PriceUSD,TxTfrValAdjUSD,AdrBalCnt,AdrActCnt\n";

    #[test]
    fn windowing_keeps_matching_rows() {
        let f = write_csv(&format!(
            "{HEADER}2010-07-18,0.08,10,100,5\n2010-07-19,0.09,11,101,6\n2010-07-20,0.085,12,102,7\n"
        ));
        let s = parse_series(f.path(), &cfg("BTC", "2010-07-18", None), &ParseOptions::default())
            .unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.dates[0], "2010-07-18".parse().unwrap());
        assert_eq!(s.price_usd, vec![Some(0.08), Some(0.09), Some(0.085)]);
        assert!(s.six_m_adr_act_cnt.is_none());
    }

    #[test]
    fn start_date_trims_earlier_rows() {
        let mut content = String::from(HEADER);
        let mut d = "2010-06-25".parse::<NaiveDate>().unwrap();
        for i in 0..20 {
            content.push_str(&format!("{d},{},1,1,1\n", i + 1));
            d = d.succ_opt().unwrap();
        }
        let f = write_csv(&content);
        let s = parse_series(f.path(), &cfg("BTC", "2010-07-01", None), &ParseOptions::default())
            .unwrap();
        assert_eq!(s.dates[0], "2010-07-01".parse().unwrap());
        assert_eq!(s.len(), 14);
    }

    #[test]
    fn duplicate_date_is_rejected() {
        let f = write_csv(&format!(
            "{HEADER}2020-01-01,1,1,1,1\n2020-01-02,2,2,2,2\n2020-01-01,3,3,3,3\n"
        ));
        let err = parse_series(f.path(), &cfg("X", "2020-01-01", None), &ParseOptions::default())
            .unwrap_err();
        assert!(matches!(err, IngestError::DuplicateDate { .. }), "{err}");
    }

    #[test]
    fn out_of_order_rows_are_normalized() {
        let f = write_csv(&format!(
            "{HEADER}2020-01-02,2,2,2,2\n2020-01-01,1,1,1,1\n2020-01-03,3,3,3,3\n"
        ));
        let s = parse_series(f.path(), &cfg("X", "2020-01-01", None), &ParseOptions::default())
            .unwrap();
        assert_eq!(s.price_usd, vec![Some(1.0), Some(2.0), Some(3.0)]);
    }

    #[test]
    fn gap_is_an_error_unless_filled() {
        let content = format!("{HEADER}2020-01-01,1,1,1,1\n2020-01-04,4,4,4,4\n");
        let f = write_csv(&content);
        let err = parse_series(f.path(), &cfg("X", "2020-01-01", None), &ParseOptions::default())
            .unwrap_err();
        assert!(matches!(err, IngestError::NonContiguousDates { .. }), "{err}");

        let s = parse_series(
            f.path(),
            &cfg("X", "2020-01-01", None),
            &ParseOptions { fill_gaps: true },
        )
        .unwrap();
        assert_eq!(s.len(), 4);
        assert_eq!(s.price_usd, vec![Some(1.0), None, None, Some(4.0)]);
        assert_eq!(s.dates[2], "2020-01-03".parse().unwrap());
    }

    #[test]
    fn empty_window_is_rejected() {
        let f = write_csv(&format!("{HEADER}2020-01-01,1,1,1,1\n"));
        let err = parse_series(f.path(), &cfg("X", "2021-01-01", None), &ParseOptions::default())
            .unwrap_err();
        assert!(matches!(err, IngestError::EmptyWindow { .. }), "{err}");
    }

    #[test]
    fn malformed_cells_are_rejected_with_row_context() {
        let f = write_csv(&format!("{HEADER}2020-01-01,abc,1,1,1\n"));
        let err = parse_series(f.path(), &cfg("X", "2020-01-01", None), &ParseOptions::default())
            .unwrap_err();
        assert!(matches!(err, IngestError::MalformedRow { row: 1, .. }), "{err}");

        let f = write_csv(&format!("{HEADER}2020-01-01,1,1,1,1\nnot-a-date,1,1,1,1\n"));
        let err = parse_series(f.path(), &cfg("X", "2020-01-01", None), &ParseOptions::default())
            .unwrap_err();
        assert!(matches!(err, IngestError::MalformedRow { row: 2, .. }), "{err}");

        let f = write_csv(&format!("{HEADER}2020-01-01,NaN,1,1,1\n"));
        let err = parse_series(f.path(), &cfg("X", "2020-01-01", None), &ParseOptions::default())
            .unwrap_err();
        assert!(matches!(err, IngestError::MalformedRow { .. }), "{err}");
    }

    #[test]
    fn missing_column_loads_as_all_missing() {
        let f = write_csv("time,PriceUSD\n2020-01-01,1\n2020-01-02,2\n");
        let s = parse_series(f.path(), &cfg("X", "2020-01-01", None), &ParseOptions::default())
            .unwrap();
        assert_eq!(s.adr_bal_cnt, vec![None, None]);
        assert!(s.six_m_adr_act_cnt.is_none());
    }

    #[test]
    fn six_month_column_is_picked_up_and_timestamps_accepted() {
        let f = write_csv(
            "time,PriceUSD,TxTfrValAdjUSD,AdrBalCnt,AdrActCnt,6MAdrActCnt\n\
             2020-01-01T00:00:00Z,1,1,1,1,10\n\
             2020-01-02 00:00:00,2,2,2,2,11\n",
        );
        let s = parse_series(f.path(), &cfg("X", "2020-01-01", None), &ParseOptions::default())
            .unwrap();
        assert_eq!(s.six_m_adr_act_cnt, Some(vec![Some(10.0), Some(11.0)]));
    }

    #[test]
    fn end_date_is_inclusive() {
        let f = write_csv(&format!(
            "{HEADER}2020-01-01,1,1,1,1\n2020-01-02,2,2,2,2\n2020-01-03,3,3,3,3\n"
        ));
        let s = parse_series(
            f.path(),
            &cfg("X", "2020-01-01", Some("2020-01-02")),
            &ParseOptions::default(),
        )
        .unwrap();
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn parse_is_idempotent_and_round_trips() {
        let f = write_csv(&format!(
            "{HEADER}2020-01-01,1.5,,3,4\n2020-01-02,2.25,5,,6\n2020-01-03,0.125,7,8,\n"
        ));
        let config = cfg("X", "2020-01-01", None);
        let a = parse_series(f.path(), &config, &ParseOptions::default()).unwrap();
        let b = parse_series(f.path(), &config, &ParseOptions::default()).unwrap();
        assert_eq!(a, b);

        let f2 = write_csv(&a.to_csv_string());
        let c = parse_series(f2.path(), &config, &ParseOptions::default()).unwrap();
        assert_eq!(a, c);
    }

    #[test]
    fn clean_series_yields_no_issues() {
        let s = AssetSeries {
            asset_id: "X".into(),
            dates: vec!["2020-01-01".parse().unwrap(), "2020-01-02".parse().unwrap()],
            price_usd: vec![Some(1.0), Some(2.0)],
            tx_tfr_val_adj_usd: vec![Some(1.0), Some(2.0)],
            adr_bal_cnt: vec![Some(1.0), Some(2.0)],
            adr_act_cnt: vec![Some(1.0), Some(2.0)],
            six_m_adr_act_cnt: None,
        };
        assert!(validate_series(&s).is_empty());
    }

    #[test]
    fn zero_and_negative_and_window_issues_are_reported() {
        let s = AssetSeries {
            asset_id: "X".into(),
            dates: vec!["2020-01-01".parse().unwrap(), "2020-01-02".parse().unwrap()],
            price_usd: vec![Some(0.0), Some(2.0)],
            tx_tfr_val_adj_usd: vec![Some(1.0), None],
            adr_bal_cnt: vec![Some(-1.0), Some(2.0)],
            adr_act_cnt: vec![Some(5.0), Some(1.0)],
            six_m_adr_act_cnt: Some(vec![Some(4.0), Some(1.0)]),
        };
        let issues = validate_series(&s);
        let find = |column: &str, kind: IssueKind| {
            issues
                .iter()
                .find(|i| i.column == column && i.kind == kind)
                .unwrap_or_else(|| panic!("no {kind} issue for {column}"))
        };
        assert_eq!(find("price_usd", IssueKind::Zero).count, 1);
        assert_eq!(find("tx_tfr_val_adj_usd", IssueKind::Missing).count, 1);
        let neg = find("adr_bal_cnt", IssueKind::Negative);
        assert!(neg.fatal);
        let below = find("six_m_adr_act_cnt", IssueKind::WindowBelowDaily);
        assert_eq!(below.count, 1);
        assert!(!below.fatal);
        assert!(issues.iter().filter(|i| i.fatal).count() == 1);
    }

    #[test]
    fn config_loads_and_resolves_relative_paths() {
        let dir = tempfile::tempdir().unwrap();
        let config_path = dir.path().join("assets.toml");
        std::fs::write(
            &config_path,
            r#"
[[asset]]
symbol = "BTC"
path = "data/btc.csv"
start = "2010-07-18"
end = "2020-03-01"

[[asset]]
symbol = "XTZ"
path = "/abs/xtz.csv"
start = "2018-07-01"
events = "data/xtz_events.csv"
"#,
        )
        .unwrap();
        let configs = load_config(&config_path).unwrap();
        assert_eq!(configs.len(), 2);
        assert_eq!(configs[0].asset_id, "BTC");
        assert_eq!(configs[0].source_path, dir.path().join("data/btc.csv"));
        assert_eq!(configs[0].end_date, Some("2020-03-01".parse().unwrap()));
        assert_eq!(configs[1].source_path, PathBuf::from("/abs/xtz.csv"));
        assert_eq!(
            configs[1].events_path,
            Some(dir.path().join("data/xtz_events.csv"))
        );
        assert_eq!(configs[1].end_date, None);
    }

    #[test]
    fn config_rejects_duplicates_and_bad_windows() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("dup.toml");
        std::fs::write(
            &p,
            "[[asset]]\nsymbol = \"A\"\npath = \"a.csv\"\nstart = \"2020-01-01\"\n\
             [[asset]]\nsymbol = \"A\"\npath = \"b.csv\"\nstart = \"2020-01-01\"\n",
        )
        .unwrap();
        assert!(matches!(
            load_config(&p).unwrap_err(),
            IngestError::DuplicateAsset { .. }
        ));

        let p2 = dir.path().join("bad.toml");
        std::fs::write(
            &p2,
            "[[asset]]\nsymbol = \"A\"\npath = \"a.csv\"\nstart = \"2020-02-01\"\nend = \"2020-01-01\"\n",
        )
        .unwrap();
        assert!(matches!(
            load_config(&p2).unwrap_err(),
            IngestError::InvalidWindow { .. }
        ));
    }
}
