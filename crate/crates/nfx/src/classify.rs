//! Daily network-effect classification from log-return deltas.
//!
//! For every consecutive day pair `(t, t+1)` we compute the natural-log
//! return of a value proxy (`delta_v`) and of a user-base proxy (`delta_u`)
//! and label the later day:
//!
//! * `Positive`  — `delta_v > delta_u >= 0`: value grew faster than the user
//!   base, which itself did not shrink.
//! * `Reverse`   — `delta_v < delta_u <= 0`: value fell faster than the user
//!   base, which itself did not grow.
//! * `None`      — finite deltas that satisfy neither strict inequality
//!   (opposite directions, equal deltas, or value lagging the user base).
//! * `Undefined` — either delta could not be computed (missing, zero, or
//!   negative operand, or a non-finite intermediate).
//!
//! Zero-or-missing observations deliberately map to `Undefined` rather than
//! to a `-inf` log return: an infinite delta would otherwise dominate every
//! downstream sum. Undefined days are excluded from both the numerator and
//! the denominator of all aggregate ratios.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

use crate::ingest::AssetSeries;

/// Value-side proxy: what stands in for the network's worth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ValueProxy {
    /// Daily USD closing price (CSV column `PriceUSD`).
    TokenPrice,
    /// Adjusted on-chain transfer value in USD (CSV column `TxTfrValAdjUSD`).
    TransactionValue,
}

impl ValueProxy {
    /// All value proxies in canonical (reporting) order.
    pub const ALL: [ValueProxy; 2] = [ValueProxy::TokenPrice, ValueProxy::TransactionValue];

    /// Header of the CSV column that houses this proxy.
    pub fn column_name(self) -> &'static str {
        match self {
            ValueProxy::TokenPrice => "PriceUSD",
            ValueProxy::TransactionValue => "TxTfrValAdjUSD",
        }
    }

    /// Short token used on the command line and in file names.
    pub fn token(self) -> &'static str {
        match self {
            ValueProxy::TokenPrice => "price",
            ValueProxy::TransactionValue => "txval",
        }
    }
}

/// User-side proxy: what stands in for the size of the user base.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum UserProxy {
    /// Addresses holding a nonzero balance (CSV column `AdrBalCnt`).
    NonZeroBalanceAddresses,
    /// Addresses active in a trailing six-month window (CSV column
    /// `6MAdrActCnt`); optional in inputs and derivable from an event log.
    SixMonthActiveAddresses,
}

impl UserProxy {
    /// All user proxies in canonical (reporting) order.
    pub const ALL: [UserProxy; 2] = [
        UserProxy::NonZeroBalanceAddresses,
        UserProxy::SixMonthActiveAddresses,
    ];

    /// Header of the CSV column that houses this proxy.
    pub fn column_name(self) -> &'static str {
        match self {
            UserProxy::NonZeroBalanceAddresses => "AdrBalCnt",
            UserProxy::SixMonthActiveAddresses => "6MAdrActCnt",
        }
    }

    /// Short token used on the command line and in file names.
    pub fn token(self) -> &'static str {
        match self {
            UserProxy::NonZeroBalanceAddresses => "balcnt",
            UserProxy::SixMonthActiveAddresses => "act6m",
        }
    }
}

/// One of the four value×user proxy combinations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ProxyPair {
    pub value: ValueProxy,
    pub user: UserProxy,
}

impl ProxyPair {
    /// All four pairs in canonical (reporting) order: value-major.
    pub const ALL: [ProxyPair; 4] = [
        ProxyPair {
            value: ValueProxy::TokenPrice,
            user: UserProxy::NonZeroBalanceAddresses,
        },
        ProxyPair {
            value: ValueProxy::TokenPrice,
            user: UserProxy::SixMonthActiveAddresses,
        },
        ProxyPair {
            value: ValueProxy::TransactionValue,
            user: UserProxy::NonZeroBalanceAddresses,
        },
        ProxyPair {
            value: ValueProxy::TransactionValue,
            user: UserProxy::SixMonthActiveAddresses,
        },
    ];

    pub fn new(value: ValueProxy, user: UserProxy) -> Self {
        ProxyPair { value, user }
    }

    /// `value_user` stem used in artifact file names, e.g. `price_balcnt`.
    pub fn file_stem(&self) -> String {
        format!("{}_{}", self.value.token(), self.user.token())
    }
}

impl fmt::Display for ProxyPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.value.token(), self.user.token())
    }
}

impl FromStr for ProxyPair {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (v, u) = s
            .split_once(':')
            .ok_or_else(|| format!("expected value:user, e.g. price:balcnt, got `{s}`"))?;
        let value = match v {
            "price" => ValueProxy::TokenPrice,
            "txval" => ValueProxy::TransactionValue,
            other => return Err(format!("unknown value proxy `{other}` (price|txval)")),
        };
        let user = match u {
            "balcnt" => UserProxy::NonZeroBalanceAddresses,
            "act6m" => UserProxy::SixMonthActiveAddresses,
            other => return Err(format!("unknown user proxy `{other}` (balcnt|act6m)")),
        };
        Ok(ProxyPair { value, user })
    }
}

/// Label assigned to a single day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NfxClass {
    Positive,
    Reverse,
    None,
    Undefined,
}

impl fmt::Display for NfxClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            NfxClass::Positive => "positive",
            NfxClass::Reverse => "reverse",
            NfxClass::None => "none",
            NfxClass::Undefined => "undefined",
        };
        f.write_str(s)
    }
}

impl FromStr for NfxClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "positive" => Ok(NfxClass::Positive),
            "reverse" => Ok(NfxClass::Reverse),
            "none" => Ok(NfxClass::None),
            "undefined" => Ok(NfxClass::Undefined),
            other => Err(format!("unknown class `{other}`")),
        }
    }
}

/// Classification of one day: the deltas that were compared and the label.
///
/// `date` is the **later** day of the `(t, t+1)` pair — the day whose change
/// relative to the previous observation is being judged. A zero or missing
/// observation on some day therefore renders that day and the next one
/// `Undefined`, since both of their deltas touch the bad value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DailyNfx {
    pub date: NaiveDate,
    /// Natural-log return of the value proxy; `NaN` when undefined.
    pub delta_v: f64,
    /// Natural-log return of the user proxy; `NaN` when undefined.
    pub delta_u: f64,
    pub class: NfxClass,
}

/// Errors from delta computation over a series.
#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("series `{asset}` has {len} rows; at least 2 are needed to form a day pair")]
    SeriesTooShort { asset: String, len: usize },
    #[error("series `{asset}` has no `{column}` column and no event log to derive it from")]
    UnknownColumn { asset: String, column: &'static str },
}

/// Natural-log return between two optional observations.
///
/// Missing, zero, negative, or non-finite operands yield `NaN`, which
/// downstream classification maps to `Undefined`.
fn log_return(prev: Option<f64>, next: Option<f64>) -> f64 {
    match (prev, next) {
        (Some(a), Some(b)) if a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0 => (b / a).ln(),
        _ => f64::NAN,
    }
}

/// Per-day log-return deltas for the chosen proxy pair.
///
/// Returns one `(date, delta_v, delta_u)` entry per consecutive day pair,
/// dated by the later day; output length is `series.len() - 1`.
pub fn log_deltas(
    series: &AssetSeries,
    pair: ProxyPair,
) -> Result<Vec<(NaiveDate, f64, f64)>, ClassifyError> {
    if series.len() < 2 {
        return Err(ClassifyError::SeriesTooShort {
            asset: series.asset_id.clone(),
            len: series.len(),
        });
    }
    let values = series.value_column(pair.value);
    let users = series
        .user_column(pair.user)
        .ok_or_else(|| ClassifyError::UnknownColumn {
            asset: series.asset_id.clone(),
            column: pair.user.column_name(),
        })?;

    let mut out = Vec::with_capacity(series.len() - 1);
    for i in 1..series.len() {
        let delta_v = log_return(values[i - 1], values[i]);
        let delta_u = log_return(users[i - 1], users[i]);
        out.push((series.dates[i], delta_v, delta_u));
    }
    Ok(out)
}

/// Classify a single day from its two deltas. Total: non-finite inputs are
/// allowed and map to `Undefined`.
pub fn classify_day(delta_v: f64, delta_u: f64) -> NfxClass {
    if !delta_v.is_finite() || !delta_u.is_finite() {
        NfxClass::Undefined
    } else if delta_v > delta_u && delta_u >= 0.0 {
        NfxClass::Positive
    } else if delta_v < delta_u && delta_u <= 0.0 {
        NfxClass::Reverse
    } else {
        NfxClass::None
    }
}

/// Compose [`log_deltas`] and [`classify_day`] over a whole series.
pub fn classify_series(
    series: &AssetSeries,
    pair: ProxyPair,
) -> Result<Vec<DailyNfx>, ClassifyError> {
    let deltas = log_deltas(series, pair)?;
    Ok(deltas
        .into_iter()
        .map(|(date, delta_v, delta_u)| DailyNfx {
            date,
            delta_v,
            delta_u,
            class: classify_day(delta_v, delta_u),
        })
        .collect())
}
