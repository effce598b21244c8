//! Serializing results: stem-plot SVGs, summary tables, per-day CSVs.
//!
//! Everything here is deterministic text generation — same inputs, same
//! bytes — so outputs can be golden-file tested and diffed across runs.
//! SVG is the only image format on purpose: a vector document needs no
//! raster backend and byte-compares cleanly.
//!
//! Human-facing Markdown rounds to three significant figures; CSV and JSON
//! keep full precision (floats print in shortest round-trip form).

use serde::Serialize;
use std::fmt::Write as _;
use std::str::FromStr;
use thiserror::Error;

use crate::aggregate::{MagnitudeRule, NfxAggregate, StrengthRatio};
use crate::classify::{DailyNfx, NfxClass, UserProxy};
use crate::correlate::{CorrelationCell, CorrelationTable};

/// Vertical scale for stem heights.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub enum YScale {
    /// Height proportional to magnitude.
    Linear,
    /// Height proportional to `ln(1 + magnitude/1e-3)`: keeps the long tail
    /// of daily magnitudes visible without flattening typical days.
    #[default]
    SymLog,
}

impl std::fmt::Display for YScale {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            YScale::Linear => "linear",
            YScale::SymLog => "symlog",
        })
    }
}

impl FromStr for YScale {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linear" => Ok(YScale::Linear),
            "symlog" => Ok(YScale::SymLog),
            other => Err(format!("unknown y scale `{other}`, expected linear|symlog")),
        }
    }
}

/// Linear-region threshold of the [`YScale::SymLog`] transform.
pub const SYMLOG_THETA: f64 = 1e-3;

/// Appearance and geometry of a stem plot.
#[derive(Debug, Clone, PartialEq)]
pub struct StemPlotSpec {
    /// Canvas width; at least 100.
    pub width_px: u32,
    /// Canvas height; at least 100.
    pub height_px: u32,
    pub positive_color: String,
    pub reverse_color: String,
    pub background: String,
    pub y_scale: YScale,
    pub title: String,
    /// Which per-day magnitude the stem height encodes.
    pub magnitude_rule: MagnitudeRule,
}

impl Default for StemPlotSpec {
    fn default() -> Self {
        StemPlotSpec {
            width_px: 900,
            height_px: 300,
            positive_color: "blue".to_string(),
            reverse_color: "red".to_string(),
            background: "white".to_string(),
            y_scale: YScale::default(),
            title: String::new(),
            magnitude_rule: MagnitudeRule::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("nothing to plot: day list is empty")]
    EmptyInput,
    #[error("invalid plot spec: {detail}")]
    InvalidSpec { detail: String },
    #[error("row {row}: {detail}")]
    MalformedRow { row: usize, detail: String },
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn scaled(y_scale: YScale, magnitude: f64) -> f64 {
    match y_scale {
        YScale::Linear => magnitude,
        YScale::SymLog => (1.0 + magnitude / SYMLOG_THETA).ln(),
    }
}

/// Render one asset-pair day list as an SVG stem plot.
///
/// Positive days are drawn as upward stems in `positive_color`, Reverse
/// days downward in `reverse_color`; None and Undefined days leave their
/// slot blank. Stem height is proportional to the scaled magnitude,
/// normalized to the tallest stem in the input.
pub fn render_stemplot(classified: &[DailyNfx], spec: &StemPlotSpec) -> Result<String, ReportError> {
    if classified.is_empty() {
        return Err(ReportError::EmptyInput);
    }
    if spec.width_px < 100 || spec.height_px < 100 {
        return Err(ReportError::InvalidSpec {
            detail: format!(
                "dimensions {}x{} below the 100 px minimum",
                spec.width_px, spec.height_px
            ),
        });
    }

    let w = spec.width_px as f64;
    let h = spec.height_px as f64;
    let (left, right) = (40.0, w - 16.0);
    let (top, bottom) = (30.0, h - 22.0);
    let base_y = (top + bottom) / 2.0;
    let half_h = (bottom - top) / 2.0;
    let n = classified.len() as f64;
    let slot = (right - left) / n;
    let stroke = format!("{:.2}", slot.clamp(0.5, 2.0));

    let max_scaled = classified
        .iter()
        .filter(|d| matches!(d.class, NfxClass::Positive | NfxClass::Reverse))
        .map(|d| scaled(spec.y_scale, spec.magnitude_rule.magnitude(d)))
        .fold(0.0f64, f64::max);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" \
         viewBox=\"0 0 {w} {h}\" role=\"img\">",
        w = spec.width_px,
        h = spec.height_px
    );
    let _ = writeln!(
        svg,
        "  <rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"{}\"/>",
        spec.width_px,
        spec.height_px,
        xml_escape(&spec.background)
    );
    let _ = writeln!(
        svg,
        "  <g font-family=\"monospace\" font-size=\"12\" fill=\"#444\">"
    );
    if !spec.title.is_empty() {
        let _ = writeln!(
            svg,
            "    <text x=\"{:.2}\" y=\"18\" text-anchor=\"middle\">{}</text>",
            w / 2.0,
            xml_escape(&spec.title)
        );
    }
    let _ = writeln!(
        svg,
        "    <text x=\"{left:.2}\" y=\"{y:.2}\" text-anchor=\"start\">{d}</text>",
        y = h - 6.0,
        d = classified[0].date
    );
    let _ = writeln!(
        svg,
        "    <text x=\"{right:.2}\" y=\"{y:.2}\" text-anchor=\"end\">{d}</text>",
        y = h - 6.0,
        d = classified[classified.len() - 1].date
    );
    if max_scaled > 0.0 {
        let _ = writeln!(
            svg,
            "    <text x=\"{left:.2}\" y=\"18\" text-anchor=\"start\">max {}</text>",
            format_sig(
                classified
                    .iter()
                    .filter(|d| matches!(d.class, NfxClass::Positive | NfxClass::Reverse))
                    .map(|d| spec.magnitude_rule.magnitude(d))
                    .fold(0.0f64, f64::max),
                3
            )
        );
    }
    let _ = svg.write_str("  </g>\n");
    let _ = writeln!(
        svg,
        "  <line class=\"axis\" x1=\"{left:.2}\" y1=\"{base_y:.2}\" x2=\"{right:.2}\" \
         y2=\"{base_y:.2}\" stroke=\"#888\" stroke-width=\"1\"/>"
    );

    for (i, day) in classified.iter().enumerate() {
        let (class_name, color, dir) = match day.class {
            NfxClass::Positive => ("stem-pos", &spec.positive_color, -1.0),
            NfxClass::Reverse => ("stem-rev", &spec.reverse_color, 1.0),
            NfxClass::None | NfxClass::Undefined => continue,
        };
        let magnitude = spec.magnitude_rule.magnitude(day);
        let height = scaled(spec.y_scale, magnitude) / max_scaled * half_h;
        let x = left + (i as f64 + 0.5) * slot;
        let _ = writeln!(
            svg,
            "  <line class=\"{class_name}\" x1=\"{x:.2}\" y1=\"{base_y:.2}\" x2=\"{x:.2}\" \
             y2=\"{y2:.2}\" stroke=\"{color}\" stroke-width=\"{stroke}\"/>",
            y2 = base_y + dir * height,
            color = xml_escape(color)
        );
    }
    let _ = svg.write_str("</svg>\n");
    Ok(svg)
}

/// Output encodings for tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum TableFormat {
    Csv,
    Json,
    Markdown,
}

impl TableFormat {
    pub fn extension(self) -> &'static str {
        match self {
            TableFormat::Csv => "csv",
            TableFormat::Json => "json",
            TableFormat::Markdown => "md",
        }
    }
}

impl std::fmt::Display for TableFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.extension())
    }
}

impl FromStr for TableFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(TableFormat::Csv),
            "json" => Ok(TableFormat::Json),
            "md" | "markdown" => Ok(TableFormat::Markdown),
            other => Err(format!("unknown format `{other}` (csv|json|md)")),
        }
    }
}

/// Round to `sig` significant figures for human-facing tables.
fn format_sig(x: f64, sig: i32) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exponent = x.abs().log10().floor() as i32;
    let decimals = (sig - 1 - exponent).max(0) as usize;
    format!("{x:.decimals$}")
}

fn opt_str(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn opt_sig(v: Option<f64>, sig: i32) -> String {
    v.map(|x| format_sig(x, sig)).unwrap_or_else(|| "-".into())
}

/// One direction row of the aggregate table (two rows per aggregate).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    pub asset: String,
    pub value_proxy: &'static str,
    pub user_proxy: &'static str,
    pub direction: &'static str,
    pub total_days: u64,
    pub undefined_days: u64,
    pub nfx_days: u64,
    pub strength_sum: f64,
    pub prevalence: f64,
    pub relative_strength: Option<f64>,
    pub magnitude_rule: String,
}

/// Flatten aggregates into their positive/reverse direction rows.
pub fn aggregate_rows(aggregates: &[NfxAggregate]) -> Vec<AggregateRow> {
    let mut rows = Vec::with_capacity(aggregates.len() * 2);
    for agg in aggregates {
        let base = |direction: &'static str| AggregateRow {
            asset: agg.asset_id.clone(),
            value_proxy: agg.pair.value.token(),
            user_proxy: agg.pair.user.token(),
            direction,
            total_days: agg.total_days,
            undefined_days: agg.undefined_days,
            nfx_days: 0,
            strength_sum: 0.0,
            prevalence: 0.0,
            relative_strength: None,
            magnitude_rule: agg.magnitude_rule.to_string(),
        };
        rows.push(AggregateRow {
            nfx_days: agg.pos_days,
            strength_sum: agg.pos_strength_sum,
            prevalence: agg.pos_prevalence,
            relative_strength: agg.pos_relative_strength,
            ..base("positive")
        });
        rows.push(AggregateRow {
            nfx_days: agg.rev_days,
            strength_sum: agg.rev_strength_sum,
            prevalence: agg.rev_prevalence,
            relative_strength: agg.rev_relative_strength,
            ..base("reverse")
        });
    }
    rows
}

const AGGREGATE_HEADER: &str = "asset,value_proxy,user_proxy,direction,total_days,\
undefined_days,nfx_days,strength_sum,prevalence,relative_strength,magnitude_rule";

/// Render the aggregate table alone in the chosen format.
pub fn render_aggregates(aggregates: &[NfxAggregate], format: TableFormat) -> String {
    let rows = aggregate_rows(aggregates);
    match format {
        TableFormat::Csv => {
            let mut out = String::from(AGGREGATE_HEADER);
            out.push('\n');
            for r in &rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{},{}",
                    r.asset,
                    r.value_proxy,
                    r.user_proxy,
                    r.direction,
                    r.total_days,
                    r.undefined_days,
                    r.nfx_days,
                    r.strength_sum,
                    r.prevalence,
                    opt_str(r.relative_strength),
                    r.magnitude_rule
                );
            }
            out
        }
        TableFormat::Json => to_json(&rows),
        TableFormat::Markdown => {
            let mut out = String::from(
                "| asset | pair | direction | total days | NFX days | strength sum | \
                 prevalence | relative strength |\n|---|---|---|---|---|---|---|---|\n",
            );
            for r in &rows {
                let _ = writeln!(
                    out,
                    "| {} | {}:{} | {} | {} | {} | {} | {} | {} |",
                    r.asset,
                    r.value_proxy,
                    r.user_proxy,
                    r.direction,
                    r.total_days,
                    r.nfx_days,
                    format_sig(r.strength_sum, 3),
                    format_sig(r.prevalence, 3),
                    opt_sig(r.relative_strength, 3)
                );
            }
            out
        }
    }
}

const CORRELATION_HEADER: &str = "asset,value_proxy,user_proxy,r,n,absent_reason";

/// Render the correlation table (including degraded cells) alone.
pub fn render_correlations(table: &CorrelationTable, format: TableFormat) -> String {
    match format {
        TableFormat::Csv => {
            let mut out = String::from(CORRELATION_HEADER);
            out.push('\n');
            for c in &table.cells {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},",
                    c.asset_id,
                    c.value_proxy.token(),
                    c.user_proxy.token(),
                    c.r,
                    c.n
                );
            }
            for a in &table.absences {
                let _ = writeln!(
                    out,
                    "{},{},{},,,{}",
                    a.asset_id,
                    a.value_proxy.token(),
                    a.user_proxy.token(),
                    a.reason
                );
            }
            out
        }
        TableFormat::Json => to_json(table),
        TableFormat::Markdown => {
            let mut out = String::from("| asset | pair | r | n |\n|---|---|---|---|\n");
            for c in &table.cells {
                let _ = writeln!(
                    out,
                    "| {} | {}:{} | {} | {} |",
                    c.asset_id,
                    c.value_proxy.token(),
                    c.user_proxy.token(),
                    format_sig(c.r, 3),
                    c.n
                );
            }
            for a in &table.absences {
                let _ = writeln!(
                    out,
                    "| {} | {}:{} | absent: {} | - |",
                    a.asset_id,
                    a.value_proxy.token(),
                    a.user_proxy.token(),
                    a.reason
                );
            }
            out
        }
    }
}

/// One asset's cross-value-proxy strength ratio, per user proxy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioRow {
    pub asset: String,
    pub user_proxy: &'static str,
    pub pos_ratio: Option<f64>,
    pub rev_ratio: Option<f64>,
}

impl RatioRow {
    pub fn new(asset: &str, user: UserProxy, ratio: StrengthRatio) -> Self {
        RatioRow {
            asset: asset.to_string(),
            user_proxy: user.token(),
            pos_ratio: ratio.pos,
            rev_ratio: ratio.rev,
        }
    }
}

/// Render price/txval strength ratios alone.
pub fn render_ratios(rows: &[RatioRow], format: TableFormat) -> String {
    match format {
        TableFormat::Csv => {
            let mut out = String::from("asset,user_proxy,pos_ratio,rev_ratio\n");
            for r in rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    r.asset,
                    r.user_proxy,
                    opt_str(r.pos_ratio),
                    opt_str(r.rev_ratio)
                );
            }
            out
        }
        TableFormat::Json => to_json(rows),
        TableFormat::Markdown => {
            let mut out =
                String::from("| asset | user proxy | pos ratio | rev ratio |\n|---|---|---|---|\n");
            for r in rows {
                let _ = writeln!(
                    out,
                    "| {} | {} | {} | {} |",
                    r.asset,
                    r.user_proxy,
                    opt_sig(r.pos_ratio, 3),
                    opt_sig(r.rev_ratio, 3)
                );
            }
            out
        }
    }
}

/// Combined document: aggregate rows plus the correlation matrix.
pub fn emit_tables(
    aggregates: &[NfxAggregate],
    cells: &[CorrelationCell],
    format: TableFormat,
) -> String {
    let corr = CorrelationTable {
        cells: cells.to_vec(),
        absences: Vec::new(),
    };
    match format {
        TableFormat::Csv => format!(
            "{}\n{}",
            render_aggregates(aggregates, format),
            render_correlations(&corr, format)
        ),
        TableFormat::Json => {
            #[derive(Serialize)]
            struct Doc {
                aggregates: Vec<AggregateRow>,
                correlations: Vec<CorrelationCell>,
            }
            to_json(&Doc {
                aggregates: aggregate_rows(aggregates),
                correlations: cells.to_vec(),
            })
        }
        TableFormat::Markdown => format!(
            "## Aggregates\n\n{}\n## Correlations\n\n{}",
            render_aggregates(aggregates, format),
            render_correlations(&corr, format)
        ),
    }
}

fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("table types serialize");
    out.push('\n');
    out
}

/// Serialize per-day classifications as `date,delta_v,delta_u,class`.
/// Non-finite deltas (Undefined days) are written as empty cells.
pub fn classified_to_csv(days: &[DailyNfx]) -> String {
    let mut out = String::from("date,delta_v,delta_u,class\n");
    let cell = |v: f64| if v.is_finite() { v.to_string() } else { String::new() };
    for d in days {
        let _ = writeln!(out, "{},{},{},{}", d.date, cell(d.delta_v), cell(d.delta_u), d.class);
    }
    out
}

/// Parse the output of [`classified_to_csv`]; empty delta cells read back
/// as NaN.
pub fn classified_from_csv(text: &str) -> Result<Vec<DailyNfx>, ReportError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "date,delta_v,delta_u,class")) => {}
        _ => {
            return Err(ReportError::MalformedRow {
                row: 0,
                detail: "expected header date,delta_v,delta_u,class".into(),
            })
        }
    }
    let mut days = Vec::new();
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let bad = |detail: String| ReportError::MalformedRow { row: i, detail };
        let mut fields = line.split(',');
        let mut next = |name: &str| {
            fields
                .next()
                .ok_or_else(|| bad(format!("missing field {name}")))
        };
        let date = next("date")?
            .parse()
            .map_err(|e| bad(format!("bad date: {e}")))?;
        let delta = |s: &str| -> Result<f64, ReportError> {
            if s.is_empty() {
                Ok(f64::NAN)
            } else {
                s.parse().map_err(|_| bad(format!("bad delta `{s}`")))
            }
        };
        let delta_v = delta(next("delta_v")?)?;
        let delta_u = delta(next("delta_u")?)?;
        let class = next("class")?
            .parse::<NfxClass>()
            .map_err(bad)?;
        days.push(DailyNfx {
            date,
            delta_v,
            delta_u,
            class,
        });
    }
    Ok(days)
}
