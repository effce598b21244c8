//! Pearson correlation between value and user proxy levels, per asset.
//!
//! Each asset contributes up to four cells (2 value proxies × 2 user
//! proxies). Missing observations are handled by pairwise deletion: a day
//! enters a cell's sample only when both columns carry a value that day,
//! and the surviving count `n` is reported so coverage stays visible.
//! Cells that cannot be computed (absent column, fewer than two pairs,
//! zero variance) are reported as absent with a reason instead of failing
//! the whole table.
//!
//! Correlation is computed on raw levels by default; `log_levels` switches
//! to natural-log levels, dropping nonpositive observations.

use rayon::prelude::*;
use serde::Serialize;
use std::fmt;
use thiserror::Error;

use crate::classify::{UserProxy, ValueProxy};
use crate::ingest::AssetSeries;

/// One computed correlation entry.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationCell {
    pub asset_id: String,
    pub value_proxy: ValueProxy,
    pub user_proxy: UserProxy,
    /// Product-moment coefficient, clamped into [-1, 1] against float
    /// overshoot.
    pub r: f64,
    /// Paired non-missing days behind `r`.
    pub n: u64,
}

/// Why a cell is missing from the table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AbsenceReason {
    /// The series lacks the requested column entirely.
    UnknownColumn,
    /// Fewer than two paired observations survive deletion.
    InsufficientData,
    /// A column is constant over the paired sample.
    DegenerateSeries,
}

impl fmt::Display for AbsenceReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AbsenceReason::UnknownColumn => "UnknownColumn",
            AbsenceReason::InsufficientData => "InsufficientData",
            AbsenceReason::DegenerateSeries => "DegenerateSeries",
        })
    }
}

/// A cell that could not be computed, and why.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellAbsence {
    pub asset_id: String,
    pub value_proxy: ValueProxy,
    pub user_proxy: UserProxy,
    pub reason: AbsenceReason,
}

/// Correlation cells plus the cells that degraded, in stable order.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct CorrelationTable {
    pub cells: Vec<CorrelationCell>,
    pub absences: Vec<CellAbsence>,
}

#[derive(Debug, Error)]
pub enum CorrelateError {
    #[error("series lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least 2 paired observations, got {n}")]
    InsufficientData { n: usize },
    #[error("{side} series is constant; correlation undefined")]
    DegenerateSeries { side: &'static str },
}

/// Options for [`correlation_table`].
#[derive(Debug, Clone, Copy, Default)]
pub struct CorrelateOptions {
    /// Correlate natural-log levels instead of raw levels; nonpositive
    /// observations are dropped like missing ones.
    pub log_levels: bool,
}

/// Pearson product-moment correlation of two equally long complete series.
///
/// Single pass with a symmetrized incremental co-moment update: each step
/// adds `(n-1)/n · dx · dy`, a bitwise-commutative product, so swapping the
/// arguments yields the identical float, not merely an equal-looking one.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, CorrelateError> {
    if x.len() != y.len() {
        return Err(CorrelateError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(CorrelateError::InsufficientData { n: x.len() });
    }
    let mut mean_x = 0.0f64;
    let mut mean_y = 0.0f64;
    let mut m2x = 0.0f64;
    let mut m2y = 0.0f64;
    let mut cxy = 0.0f64;
    let mut n = 0.0f64;
    for (&xi, &yi) in x.iter().zip(y) {
        n += 1.0;
        let f = (n - 1.0) / n;
        let dx = xi - mean_x;
        let dy = yi - mean_y;
        // The deviation product is computed before scaling so that the
        // swapped call performs literally the same multiplications.
        m2x += f * (dx * dx);
        m2y += f * (dy * dy);
        cxy += f * (dx * dy);
        mean_x += dx / n;
        mean_y += dy / n;
    }
    if m2x == 0.0 {
        return Err(CorrelateError::DegenerateSeries { side: "first" });
    }
    if m2y == 0.0 {
        return Err(CorrelateError::DegenerateSeries { side: "second" });
    }
    Ok((cxy / (m2x * m2y).sqrt()).clamp(-1.0, 1.0))
}

/// Pairwise-complete observations for one (value, user) column pair.
fn paired(
    values: &[Option<f64>],
    users: &[Option<f64>],
    log_levels: bool,
) -> (Vec<f64>, Vec<f64>) {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (v, u) in values.iter().zip(users) {
        let (Some(v), Some(u)) = (*v, *u) else {
            continue;
        };
        if log_levels {
            if v > 0.0 && u > 0.0 {
                xs.push(v.ln());
                ys.push(u.ln());
            }
        } else {
            xs.push(v);
            ys.push(u);
        }
    }
    (xs, ys)
}

/// Build the full asset × value proxy × user proxy correlation table.
///
/// Cell order is deterministic: input series order, then value proxy, then
/// user proxy. Failed cells degrade into [`CorrelationTable::absences`]
/// rather than aborting the table.
pub fn correlation_table(series: &[AssetSeries], options: CorrelateOptions) -> CorrelationTable {
    let per_asset: Vec<CorrelationTable> = series
        .par_iter()
        .map(|s| {
            let mut table = CorrelationTable::default();
            for value_proxy in ValueProxy::ALL {
                for user_proxy in UserProxy::ALL {
                    let absent = |reason| CellAbsence {
                        asset_id: s.asset_id.clone(),
                        value_proxy,
                        user_proxy,
                        reason,
                    };
                    let Some(users) = s.user_column(user_proxy) else {
                        table.absences.push(absent(AbsenceReason::UnknownColumn));
                        continue;
                    };
                    let (xs, ys) = paired(s.value_column(value_proxy), users, options.log_levels);
                    match pearson(&xs, &ys) {
                        Ok(r) => table.cells.push(CorrelationCell {
                            asset_id: s.asset_id.clone(),
                            value_proxy,
                            user_proxy,
                            r,
                            n: xs.len() as u64,
                        }),
                        Err(CorrelateError::InsufficientData { .. }) => {
                            table.absences.push(absent(AbsenceReason::InsufficientData));
                        }
                        Err(CorrelateError::DegenerateSeries { .. }) => {
                            table.absences.push(absent(AbsenceReason::DegenerateSeries));
                        }
                        Err(CorrelateError::LengthMismatch { .. }) => {
                            unreachable!("paired() returns equal-length vectors")
                        }
                    }
                }
            }
            table
        })
        .collect();

    let mut merged = CorrelationTable::default();
    for t in per_asset {
        merged.cells.extend(t.cells);
        merged.absences.extend(t.absences);
    }
    merged
}
