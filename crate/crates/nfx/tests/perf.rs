//! Throughput check for the sliding-window replay: ten million events over a
//! million distinct addresses must finish well inside interactive budgets.
//! Kept in its own test binary so it gets the machine to itself instead of
//! time-slicing against the unit-test threads.

use chrono::NaiveDate;
use nfx::{derive_active_counts, LedgerEvent, WindowSpec};

#[test]
fn windowed_replay_handles_ten_million_events() {
    let first = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
    let names: Vec<String> = (0..1_000_000).map(|i| format!("a{i}")).collect();
    let start = std::time::Instant::now();
    let events = (0..2000u64).flat_map(|d| {
        let date = first + chrono::Days::new(d);
        let names = &names;
        (0..5000u64).map(move |j| {
            let i = d * 5000 + j;
            let s = (i % 1_000_000) as usize;
            let r = ((i * 7 + 1) % 1_000_000) as usize;
            LedgerEvent {
                day: date,
                sender: names[s].clone(),
                receiver: names[r].clone(),
                amount: 0.0,
            }
        })
    });
    let active = derive_active_counts(events, WindowSpec::default()).unwrap();
    assert_eq!(active.daily.len(), 2000);
    assert!(active.windowed.iter().all(|&(_, c)| c <= 1_000_000));
    let elapsed = start.elapsed();
    eprintln!("replay took {elapsed:?}");
    assert!(
        elapsed.as_secs_f64() < 10.0,
        "replay took {elapsed:?}, budget 10s"
    );
}
