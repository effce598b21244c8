//! Randomized invariants over the classifier, the CSV round trip, and the
//! ledger-derived activity counts. Each property restates the intended
//! behaviour independently of the implementation (naive rescans, explicit
//! predicates) so structural refactors cannot silently change semantics.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{Days, NaiveDate};
use nfx::{
    classify_day, derive_active_counts, derive_balance_counts, log_deltas, parse_series,
    AssetConfig, AssetSeries, LedgerEvent, NfxClass, ProxyPair, UserProxy, ValueProxy,
    WindowSpec, MINT_SENDER,
};
use proptest::prelude::*;

fn epoch() -> NaiveDate {
    NaiveDate::from_ymd_opt(2015, 6, 1).unwrap()
}

/// The classification predicate, restated from scratch.
fn expected_class(delta_v: f64, delta_u: f64) -> NfxClass {
    if delta_v.is_nan()
        || delta_u.is_nan()
        || delta_v.is_infinite()
        || delta_u.is_infinite()
    {
        return NfxClass::Undefined;
    }
    let positive = delta_v > delta_u && delta_u >= 0.0;
    let reverse = delta_v < delta_u && delta_u <= 0.0;
    match (positive, reverse) {
        (true, false) => NfxClass::Positive,
        (false, true) => NfxClass::Reverse,
        (false, false) => NfxClass::None,
        (true, true) => unreachable!("predicates are mutually exclusive"),
    }
}

fn swap_direction(class: NfxClass) -> NfxClass {
    match class {
        NfxClass::Positive => NfxClass::Reverse,
        NfxClass::Reverse => NfxClass::Positive,
        other => other,
    }
}

/// Optional positive cell: ~1 in 5 missing.
fn cell() -> impl Strategy<Value = Option<f64>> {
    prop_oneof![
        1 => Just(None),
        4 => (1e-9f64..1e12).prop_map(Some),
    ]
}

fn series(len: usize) -> impl Strategy<Value = AssetSeries> {
    let col = || prop::collection::vec(cell(), len);
    (
        0u64..3000,
        col(),
        col(),
        col(),
        col(),
        prop::option::of(col()),
    )
        .prop_map(move |(offset, price, tx, bal, act, six_m)| AssetSeries {
            asset_id: "T".to_string(),
            dates: (0..len as u64)
                .map(|i| epoch() + Days::new(offset + i))
                .collect(),
            price_usd: price,
            tx_tfr_val_adj_usd: tx,
            adr_bal_cnt: bal,
            adr_act_cnt: act,
            six_m_adr_act_cnt: six_m,
        })
}

const POOL: [&str; 6] = ["alpha", "bravo", "carol", "delta", "erin", "frank"];

/// (day offset, sender index, receiver index); index 6 = the mint source.
fn activity_events() -> impl Strategy<Value = Vec<LedgerEvent>> {
    prop::collection::vec((0u64..30, 0usize..7, 0usize..6), 1..60).prop_map(|raw| {
        let mut raw = raw;
        raw.sort_by_key(|&(d, _, _)| d);
        raw.into_iter()
            .map(|(d, s, r)| LedgerEvent {
                day: epoch() + Days::new(d),
                sender: if s == 6 {
                    MINT_SENDER.to_string()
                } else {
                    POOL[s].to_string()
                },
                receiver: POOL[r].to_string(),
                amount: 1.0,
            })
            .collect()
    })
}

/// Distinct non-mint participants across `events`, naive scan.
fn naive_active(events: &[LedgerEvent], day: NaiveDate, window: u64) -> u64 {
    let mut seen = BTreeSet::new();
    for e in events {
        let age = day.signed_duration_since(e.day).num_days();
        if age < 0 || age >= window as i64 {
            continue;
        }
        if e.sender != MINT_SENDER {
            seen.insert(e.sender.as_str());
        }
        if e.receiver != MINT_SENDER {
            seen.insert(e.receiver.as_str());
        }
    }
    seen.len() as u64
}

proptest! {
    #[test]
    fn classify_matches_the_restated_predicate(dv in any::<f64>(), du in any::<f64>()) {
        prop_assert_eq!(classify_day(dv, du), expected_class(dv, du));
    }

    #[test]
    fn finite_deltas_never_classify_as_undefined(
        dv in prop::num::f64::NORMAL | prop::num::f64::ZERO | prop::num::f64::SUBNORMAL,
        du in prop::num::f64::NORMAL | prop::num::f64::ZERO | prop::num::f64::SUBNORMAL,
    ) {
        prop_assert_ne!(classify_day(dv, du), NfxClass::Undefined);
    }

    #[test]
    fn negating_both_deltas_swaps_direction(dv in any::<f64>(), du in any::<f64>()) {
        prop_assert_eq!(classify_day(-dv, -du), swap_direction(classify_day(dv, du)));
    }

    #[test]
    fn equal_deltas_are_never_directional(d in any::<f64>()) {
        let class = classify_day(d, d);
        prop_assert!(class == NfxClass::None || class == NfxClass::Undefined);
    }

    /// Rescaling a whole column by a power of two (exact in binary floating
    /// point) must leave every delta bitwise unchanged, hence every class.
    #[test]
    fn power_of_two_rescaling_preserves_deltas(
        s in series(12),
        k in -20i32..=20,
        scale_value in any::<bool>(),
    ) {
        let factor = (2.0f64).powi(k);
        let mut scaled = s.clone();
        let col = if scale_value {
            &mut scaled.price_usd
        } else {
            &mut scaled.adr_bal_cnt
        };
        for c in col.iter_mut() {
            *c = c.map(|v| v * factor);
        }
        let pair = ProxyPair::new(ValueProxy::TokenPrice, UserProxy::NonZeroBalanceAddresses);
        let base = log_deltas(&s, pair).unwrap();
        let after = log_deltas(&scaled, pair).unwrap();
        prop_assert_eq!(base.len(), after.len());
        for (b, a) in base.iter().zip(&after) {
            prop_assert_eq!(b.0, a.0);
            prop_assert_eq!(b.1.to_bits(), a.1.to_bits());
            prop_assert_eq!(b.2.to_bits(), a.2.to_bits());
        }
    }

    /// Writing a series out and parsing it back must reproduce every cell
    /// bitwise, fabricating nothing and dropping nothing.
    #[test]
    fn series_round_trips_through_csv(s in (1usize..40).prop_flat_map(series)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("series.csv");
        std::fs::write(&path, s.to_csv_string()).unwrap();
        let config = AssetConfig {
            asset_id: s.asset_id.clone(),
            source_path: path.clone(),
            start_date: s.dates[0],
            end_date: None,
            events_path: None,
        };
        let got = parse_series(&path, &config, &Default::default()).unwrap();
        prop_assert_eq!(&got.asset_id, &s.asset_id);
        prop_assert_eq!(&got.dates, &s.dates);
        prop_assert_eq!(&got.price_usd, &s.price_usd);
        prop_assert_eq!(&got.tx_tfr_val_adj_usd, &s.tx_tfr_val_adj_usd);
        prop_assert_eq!(&got.adr_bal_cnt, &s.adr_bal_cnt);
        prop_assert_eq!(&got.adr_act_cnt, &s.adr_act_cnt);
        prop_assert_eq!(&got.six_m_adr_act_cnt, &s.six_m_adr_act_cnt);
    }

    /// The sliding-window replay must agree with a per-day full rescan.
    #[test]
    fn windowed_counts_match_a_naive_rescan(events in activity_events(), window in 1u32..12) {
        let spec = WindowSpec::new(window).unwrap();
        let counts = derive_active_counts(events.clone(), spec).unwrap();
        let first = events.first().unwrap().day;
        let last = events.last().unwrap().day;
        let expect_len = last.signed_duration_since(first).num_days() as usize + 1;
        prop_assert_eq!(counts.daily.len(), expect_len);
        prop_assert_eq!(counts.windowed.len(), expect_len);
        for &(day, n) in &counts.daily {
            prop_assert_eq!(n, naive_active(&events, day, 1), "daily mismatch on {}", day);
        }
        for &(day, n) in &counts.windowed {
            prop_assert_eq!(
                n,
                naive_active(&events, day, window as u64),
                "windowed mismatch on {}", day
            );
        }
    }

    /// A longer window can only see more addresses, and never more than the
    /// cumulative distinct population.
    #[test]
    fn widening_the_window_is_monotone(events in activity_events(), w1 in 1u32..8, extra in 1u32..8) {
        let narrow = derive_active_counts(events.clone(), WindowSpec::new(w1).unwrap()).unwrap();
        let wide = derive_active_counts(events.clone(), WindowSpec::new(w1 + extra).unwrap()).unwrap();
        let population = {
            let mut all = BTreeSet::new();
            for e in &events {
                if e.sender != MINT_SENDER {
                    all.insert(e.sender.as_str());
                }
                if e.receiver != MINT_SENDER {
                    all.insert(e.receiver.as_str());
                }
            }
            all.len() as u64
        };
        for (a, b) in narrow.windowed.iter().zip(&wide.windowed) {
            prop_assert_eq!(a.0, b.0);
            prop_assert!(a.1 <= b.1);
            prop_assert!(b.1 <= population);
        }
    }

    /// Balance counts must agree with a naive replay that mirrors the same
    /// per-event arithmetic.
    #[test]
    fn balance_counts_match_a_naive_replay(
        transfers in prop::collection::vec((1u64..25, 0usize..6, 0usize..6, 0u32..5), 0..50),
    ) {
        let mut events: Vec<LedgerEvent> = POOL
            .iter()
            .map(|name| LedgerEvent {
                day: epoch(),
                sender: MINT_SENDER.to_string(),
                receiver: name.to_string(),
                amount: 1000.0,
            })
            .collect();
        let mut transfers = transfers;
        transfers.sort_by_key(|&(d, ..)| d);
        events.extend(transfers.iter().map(|&(d, s, r, amt)| LedgerEvent {
            day: epoch() + Days::new(d),
            sender: POOL[s].to_string(),
            receiver: POOL[r].to_string(),
            amount: f64::from(amt),
        }));

        let got = derive_balance_counts(events.clone()).unwrap();

        let mut balances: BTreeMap<&str, f64> = BTreeMap::new();
        let mut by_day: BTreeMap<NaiveDate, Vec<&LedgerEvent>> = BTreeMap::new();
        for e in &events {
            by_day.entry(e.day).or_default().push(e);
        }
        let first = *by_day.keys().next().unwrap();
        let last = *by_day.keys().next_back().unwrap();
        let mut expected = Vec::new();
        let mut day = first;
        while day <= last {
            for e in by_day.get(&day).into_iter().flatten() {
                if e.sender != MINT_SENDER {
                    *balances.entry(e.sender.as_str()).or_default() -= e.amount;
                }
                if e.receiver != MINT_SENDER {
                    *balances.entry(e.receiver.as_str()).or_default() += e.amount;
                }
            }
            let count = balances.values().filter(|&&b| b > 0.0).count() as u64;
            expected.push((day, count));
            day = day + Days::new(1);
        }
        prop_assert_eq!(got, expected);
    }
}
