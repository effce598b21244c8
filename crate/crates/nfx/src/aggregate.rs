//! Folding daily classifications into per-asset summary statistics.
//!
//! For one asset and proxy pair, the aggregate reports how often each
//! direction of network effect occurred (prevalence over classified days)
//! and how strong it was (sum of per-day magnitudes, and that sum scaled
//! per 100 affected days). `Undefined` days are excluded from both the
//! numerator and the denominator: they carry no information about the
//! predicate, only about data quality, so they are counted separately.
//!
//! The per-day magnitude is configurable: `AbsDeltaV` (default) uses the
//! value move `|delta_v|`; `AbsExcess` uses `|delta_v - delta_u|`, the part
//! of the value move not explained by user-base growth.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

use crate::classify::{DailyNfx, NfxClass, ProxyPair, ValueProxy};

/// How the per-day strength magnitude is measured.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MagnitudeRule {
    /// `|delta_v|`: the full value move on an affected day.
    #[default]
    AbsDeltaV,
    /// `|delta_v - delta_u|`: the value move in excess of the user move.
    /// Strictly positive on every counted day, since the predicate's
    /// inequalities are strict.
    AbsExcess,
}

impl MagnitudeRule {
    pub fn magnitude(self, day: &DailyNfx) -> f64 {
        match self {
            MagnitudeRule::AbsDeltaV => day.delta_v.abs(),
            MagnitudeRule::AbsExcess => (day.delta_v - day.delta_u).abs(),
        }
    }
}

impl fmt::Display for MagnitudeRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MagnitudeRule::AbsDeltaV => "abs-delta-v",
            MagnitudeRule::AbsExcess => "abs-excess",
        })
    }
}

impl FromStr for MagnitudeRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "abs-delta-v" => Ok(MagnitudeRule::AbsDeltaV),
            "abs-excess" => Ok(MagnitudeRule::AbsExcess),
            other => Err(format!(
                "unknown magnitude rule `{other}` (abs-delta-v|abs-excess)"
            )),
        }
    }
}

/// Summary statistics for one asset under one proxy pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NfxAggregate {
    pub asset_id: String,
    pub pair: ProxyPair,
    /// Days that classified Positive, Reverse, or None.
    pub total_days: u64,
    /// Days excluded for missing/zero data; not part of any ratio.
    pub undefined_days: u64,
    pub pos_days: u64,
    pub rev_days: u64,
    pub pos_strength_sum: f64,
    pub rev_strength_sum: f64,
    /// `pos_days / total_days`.
    pub pos_prevalence: f64,
    pub rev_prevalence: f64,
    /// `100 · pos_strength_sum / pos_days`; absent when no such day exists.
    pub pos_relative_strength: Option<f64>,
    pub rev_relative_strength: Option<f64>,
    pub magnitude_rule: MagnitudeRule,
}

#[derive(Debug, Error)]
pub enum AggregateError {
    #[error("asset `{asset}`: no classified days (all inputs Undefined or empty)")]
    NoClassifiedDays { asset: String },
    #[error(
        "strength ratio needs price and txval aggregates of one asset and user proxy; \
         got {left_asset}/{left_pair} vs {right_asset}/{right_pair}"
    )]
    MismatchedPair {
        left_asset: String,
        left_pair: ProxyPair,
        right_asset: String,
        right_pair: ProxyPair,
    },
}

/// Share of classified days carrying the effect.
pub fn prevalence(days: u64, total_days: u64) -> f64 {
    days as f64 / total_days as f64
}

/// Strength sum scaled to a 100-day period; absent when no day carried the
/// effect.
pub fn relative_strength(strength_sum: f64, days: u64) -> Option<f64> {
    (days > 0).then(|| 100.0 * strength_sum / days as f64)
}

/// Sum magnitudes in a canonical order so the result is exactly
/// permutation-invariant, not merely up to float reassociation.
fn stable_sum(mut magnitudes: Vec<f64>) -> f64 {
    magnitudes.sort_unstable_by(f64::total_cmp);
    // Fold from +0.0 rather than `Iterator::sum`, whose -0.0 identity would
    // leak a negative zero into rendered tables when no day qualified.
    magnitudes.iter().fold(0.0, |acc, m| acc + m)
}

/// Fold a day list into an [`NfxAggregate`] for the given asset and pair.
pub fn aggregate(
    asset_id: &str,
    pair: ProxyPair,
    classified: &[DailyNfx],
    rule: MagnitudeRule,
) -> Result<NfxAggregate, AggregateError> {
    let mut total_days = 0u64;
    let mut undefined_days = 0u64;
    let mut pos_magnitudes = Vec::new();
    let mut rev_magnitudes = Vec::new();
    for day in classified {
        match day.class {
            NfxClass::Undefined => undefined_days += 1,
            NfxClass::Positive => {
                total_days += 1;
                pos_magnitudes.push(rule.magnitude(day));
            }
            NfxClass::Reverse => {
                total_days += 1;
                rev_magnitudes.push(rule.magnitude(day));
            }
            NfxClass::None => total_days += 1,
        }
    }
    if total_days == 0 {
        return Err(AggregateError::NoClassifiedDays {
            asset: asset_id.to_string(),
        });
    }
    let pos_days = pos_magnitudes.len() as u64;
    let rev_days = rev_magnitudes.len() as u64;
    let pos_strength_sum = stable_sum(pos_magnitudes);
    let rev_strength_sum = stable_sum(rev_magnitudes);
    Ok(NfxAggregate {
        asset_id: asset_id.to_string(),
        pair,
        total_days,
        undefined_days,
        pos_days,
        rev_days,
        pos_strength_sum,
        rev_strength_sum,
        pos_prevalence: prevalence(pos_days, total_days),
        rev_prevalence: prevalence(rev_days, total_days),
        pos_relative_strength: relative_strength(pos_strength_sum, pos_days),
        rev_relative_strength: relative_strength(rev_strength_sum, rev_days),
        magnitude_rule: rule,
    })
}

/// Ratio of strength sums between the two value proxies of one asset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StrengthRatio {
    /// `pos_strength_sum(price) / pos_strength_sum(txval)`; absent when the
    /// divisor is zero.
    pub pos: Option<f64>,
    pub rev: Option<f64>,
}

/// Compare price-based against transfer-value-based strength for one asset
/// and user proxy.
pub fn strength_ratio(
    agg_price: &NfxAggregate,
    agg_txval: &NfxAggregate,
) -> Result<StrengthRatio, AggregateError> {
    let matched = agg_price.asset_id == agg_txval.asset_id
        && agg_price.pair.user == agg_txval.pair.user
        && agg_price.pair.value == ValueProxy::TokenPrice
        && agg_txval.pair.value == ValueProxy::TransactionValue;
    if !matched {
        return Err(AggregateError::MismatchedPair {
            left_asset: agg_price.asset_id.clone(),
            left_pair: agg_price.pair,
            right_asset: agg_txval.asset_id.clone(),
            right_pair: agg_txval.pair,
        });
    }
    let ratio = |num: f64, den: f64| (den != 0.0).then(|| num / den);
    Ok(StrengthRatio {
        pos: ratio(agg_price.pos_strength_sum, agg_txval.pos_strength_sum),
        rev: ratio(agg_price.rev_strength_sum, agg_txval.rev_strength_sum),
    })
}
