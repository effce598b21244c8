//! Network-effect detection for cryptoasset time series.

pub mod aggregate;
pub mod classify;
pub mod correlate;
pub mod ingest;
pub mod ledger;
pub mod report;
pub mod synth;

pub use aggregate::{aggregate, strength_ratio, MagnitudeRule, NfxAggregate, StrengthRatio};
pub use classify::{
    classify_day, classify_series, log_deltas, DailyNfx, NfxClass, ProxyPair, UserProxy,
    ValueProxy,
};
pub use correlate::{
    correlation_table, pearson, CorrelateOptions, CorrelationCell, CorrelationTable,
};
pub use ingest::{load_config, parse_series, validate_series, AssetConfig, AssetSeries, ParseOptions};
pub use ledger::{
    derive_active_counts, derive_balance_counts, ActiveCounts, LedgerEvent, WindowSpec,
    MINT_SENDER,
};
pub use report::{emit_tables, render_stemplot, StemPlotSpec, TableFormat, YScale};
pub use synth::{generate, generate_ledger, GrowthLaw, SynthSpec};
