//! Synthetic series and event logs with known ground-truth structure.
//!
//! The generator grows a user base geometrically, maps it through a chosen
//! value law, and optionally multiplies lognormal noise onto the value
//! columns. Because the law is applied to the *already rounded* integer user
//! count, the zero-noise fixtures have exact relationships that tests can
//! lean on: under [`GrowthLaw::Linear`] the value column equals the user
//! column bit-for-bit (every day classifies `None`, the knife-edge of the
//! predicate), and under [`GrowthLaw::Metcalfe`] `delta_v` is `2 * delta_u`
//! up to a few ulps.
//!
//! [`generate_ledger`] emits a mint/sweep event stream whose derived
//! balance count reproduces the same user sequence exactly, tying the
//! ledger-derivation path to the series path.

use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::AssetSeries;
use crate::ledger::{LedgerEvent, MINT_SENDER};

/// Asset id stamped on generated series.
pub const SYNTH_ASSET_ID: &str = "SYNTH";

/// First day of every generated series.
pub fn synth_epoch() -> NaiveDate {
    NaiveDate::from_ymd_opt(2016, 1, 1).unwrap()
}

/// Functional form tying value to user count (scale constant fixed at 1;
/// downstream classification is scale-invariant anyway).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GrowthLaw {
    /// V = u.
    Linear,
    /// V = u·ln u (zero at u = 1; such days classify Undefined).
    NLogN,
    /// V = u².
    Metcalfe,
    /// V = 2^u; overflows to a missing cell for large u.
    Exponential,
    /// V = 1, so the value column is pure noise.
    NoiseOnly,
}

impl GrowthLaw {
    fn value(self, u: f64) -> f64 {
        match self {
            GrowthLaw::Linear => u,
            GrowthLaw::NLogN => u * u.ln(),
            GrowthLaw::Metcalfe => u * u,
            GrowthLaw::Exponential => u.exp2(),
            GrowthLaw::NoiseOnly => 1.0,
        }
    }
}

impl std::str::FromStr for GrowthLaw {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linear" => Ok(GrowthLaw::Linear),
            "nlogn" => Ok(GrowthLaw::NLogN),
            "metcalfe" => Ok(GrowthLaw::Metcalfe),
            "exponential" => Ok(GrowthLaw::Exponential),
            "noise" | "noiseonly" => Ok(GrowthLaw::NoiseOnly),
            other => Err(format!(
                "unknown law `{other}` (linear|nlogn|metcalfe|exponential|noise)"
            )),
        }
    }
}

/// Recipe for one synthetic asset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub law: GrowthLaw,
    /// Series length; at least 2 so one delta exists.
    pub days: u32,
    /// Initial user base, > 0.
    pub u0: f64,
    /// Per-day user-base multiplier, > 0.
    pub growth: f64,
    /// Lognormal sigma applied to the value columns; 0 = noiseless.
    pub noise_sigma: f64,
    pub seed: u64,
}

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synth spec: {detail}")]
    InvalidSpec { detail: String },
}

fn check(spec: &SynthSpec) -> Result<(), SynthError> {
    let fail = |detail: &str| {
        Err(SynthError::InvalidSpec {
            detail: detail.to_string(),
        })
    };
    if spec.days < 2 {
        return fail("days must be at least 2");
    }
    if !(spec.u0.is_finite() && spec.u0 > 0.0) {
        return fail("u0 must be finite and positive");
    }
    if !(spec.growth.is_finite() && spec.growth > 0.0) {
        return fail("growth must be finite and positive");
    }
    if !(spec.noise_sigma.is_finite() && spec.noise_sigma >= 0.0) {
        return fail("noise_sigma must be finite and nonnegative");
    }
    Ok(())
}

impl SynthSpec {
    /// The integer user sequence `round(u0·growth^t).max(1)` for
    /// `t = 0..days`.
    pub fn user_counts(&self) -> Vec<u64> {
        (0..self.days)
            .map(|t| (self.u0 * self.growth.powi(t as i32)).round().max(1.0) as u64)
            .collect()
    }
}

/// One standard-normal pair via the Box–Muller transform.
///
/// Hand-rolled on purpose: the output must stay byte-identical for a fixed
/// seed across dependency upgrades, and rejection-sampling based samplers do
/// not guarantee a stable draw count per variate.
fn standard_normal_pair<R: Rng>(rng: &mut R) -> (f64, f64) {
    let u1: f64 = 1.0 - rng.gen::<f64>(); // (0, 1]: keeps the log finite
    let u2: f64 = rng.gen();
    let radius = (-2.0 * u1.ln()).sqrt();
    let angle = std::f64::consts::TAU * u2;
    (radius * angle.cos(), radius * angle.sin())
}

/// Generate a full synthetic [`AssetSeries`] from a [`SynthSpec`].
///
/// All four proxy columns are populated: both value columns follow the law
/// with independent noise draws, both user columns equal the integer user
/// sequence. A value that overflows the float range is recorded as missing.
pub fn generate(spec: &SynthSpec) -> Result<AssetSeries, SynthError> {
    check(spec)?;
    let users = spec.user_counts();
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    let epoch = synth_epoch();

    let mut price = Vec::with_capacity(users.len());
    let mut txval = Vec::with_capacity(users.len());
    for &u in &users {
        let base = spec.law.value(u as f64);
        let (price_mult, tx_mult) = if spec.noise_sigma == 0.0 {
            (1.0, 1.0)
        } else {
            let (z_price, z_tx) = standard_normal_pair(&mut rng);
            (
                (spec.noise_sigma * z_price).exp(),
                (spec.noise_sigma * z_tx).exp(),
            )
        };
        let keep = |v: f64| v.is_finite().then_some(v);
        price.push(keep(base * price_mult));
        txval.push(keep(base * tx_mult));
    }

    let user_col: Vec<Option<f64>> = users.iter().map(|&u| Some(u as f64)).collect();
    Ok(AssetSeries {
        asset_id: SYNTH_ASSET_ID.to_string(),
        dates: (0..users.len() as u64)
            .map(|t| epoch + chrono::Days::new(t))
            .collect(),
        price_usd: price,
        tx_tfr_val_adj_usd: txval,
        adr_bal_cnt: user_col.clone(),
        adr_act_cnt: user_col.clone(),
        six_m_adr_act_cnt: Some(user_col),
    })
}

/// Event stream whose end-of-day positive-balance count equals `targets[t]`
/// on day `start + t`.
///
/// Growth mints one unit to fresh addresses `a0, a1, ...`; shrinkage sweeps
/// the most recently funded address's full balance into `a0`. Days whose
/// target matches the previous day emit nothing (derived counts carry), but
/// an event-free final day gets a zero-amount self-touch so the derived
/// range spans every target day.
pub fn ledger_tracking(start: NaiveDate, targets: &[u64]) -> Vec<LedgerEvent> {
    let mut events = Vec::new();
    let mut alive: u64 = 0; // addresses a0..a_{alive-1} hold a positive balance
    let mut high_water: u64 = 0; // next fresh address index
    let mut a0_balance = 0.0;
    for (t, &target) in targets.iter().enumerate() {
        let day = start + chrono::Days::new(t as u64);
        let target = target.max(1);
        while alive < target {
            let name = format!("a{high_water}");
            events.push(LedgerEvent {
                day,
                sender: MINT_SENDER.to_string(),
                receiver: name,
                amount: 1.0,
            });
            if high_water == 0 {
                a0_balance += 1.0;
            }
            alive += 1;
            high_water += 1;
        }
        while alive > target {
            // Sweep the top address (minted with exactly one unit) into a0.
            alive -= 1;
            events.push(LedgerEvent {
                day,
                sender: format!("a{}", alive),
                receiver: "a0".to_string(),
                amount: 1.0,
            });
            a0_balance += 1.0;
        }
        let _ = a0_balance; // tracked for clarity; sweeps are always 1 unit
        if t == targets.len() - 1 && events.last().map(|e| e.day) != Some(day) {
            events.push(LedgerEvent {
                day,
                sender: "a0".to_string(),
                receiver: "a0".to_string(),
                amount: 0.0,
            });
        }
    }
    events
}

/// Generate the event-log counterpart of [`generate`]: a stream whose
/// derived `AdrBalCnt` reproduces the requested user sequence exactly.
pub fn generate_ledger(spec: &SynthSpec) -> Result<Vec<LedgerEvent>, SynthError> {
    check(spec)?;
    Ok(ledger_tracking(synth_epoch(), &spec.user_counts()))
}
