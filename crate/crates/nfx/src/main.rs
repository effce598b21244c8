//! Command-line front end wiring ingestion → ledger derivation →
//! classification → aggregation → reporting.
//!
//! Exit codes: 0 on success, 1 for input problems (unreadable or malformed
//! files, bad windows, data that fails validation), 2 for computation
//! problems (measurements that cannot be produced from otherwise readable
//! input). All diagnostics go to standard error and name the asset they
//! concern; results land in files or on standard output.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use nfx::ledger::{
    derive_active_counts_through, derive_balance_counts_through, events_to_csv_string,
    load_events,
};
use nfx::report::{
    classified_from_csv, classified_to_csv, render_aggregates, render_correlations,
    render_ratios, RatioRow,
};
use nfx::{
    aggregate, classify_series, correlation_table, emit_tables, generate, generate_ledger,
    load_config, parse_series, render_stemplot, strength_ratio, validate_series, AssetConfig,
    AssetSeries, CorrelateOptions, CorrelationTable, DailyNfx, GrowthLaw, MagnitudeRule,
    NfxAggregate, ParseOptions, ProxyPair, StemPlotSpec, SynthSpec, TableFormat, UserProxy,
    ValueProxy, WindowSpec, YScale,
};

#[derive(Parser)]
#[command(
    name = "nfx",
    version,
    about = "Daily network-effect measurements for cryptoasset series"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    globals: Globals,
}

#[derive(Args)]
struct Globals {
    /// Trailing window length, in days, for ledger-derived active counts.
    #[arg(long, global = true, default_value_t = WindowSpec::DEFAULT_DAYS)]
    window_days: u32,
    /// Per-day magnitude feeding strength sums and stem heights
    /// (abs-delta-v | abs-excess).
    #[arg(long, global = true, default_value_t)]
    magnitude_rule: MagnitudeRule,
    /// Insert all-missing rows for interior date gaps instead of failing.
    #[arg(long, global = true)]
    fill_gaps: bool,
    /// Correlate log levels instead of raw levels (nonpositive days are
    /// dropped pairwise).
    #[arg(long, global = true)]
    log_levels: bool,
    /// Seed for synthetic generation.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Process every configured asset end to end, writing classification
    /// CSVs, summary tables, and stem-plot SVGs under the output directory.
    Run(RunArgs),
    /// Load each configured asset and report data-quality findings.
    Validate {
        /// TOML file listing the assets to check.
        #[arg(long)]
        config: PathBuf,
    },
    /// Turn a transfer-event log into daily proxy columns.
    Derive(DeriveArgs),
    /// Generate a synthetic daily series under a chosen growth law.
    Synth(SynthArgs),
    /// Render a stem plot from a classification CSV.
    Plot(PlotArgs),
    /// Print a summary table to standard output.
    Table(TableArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML file listing the assets to process.
    #[arg(long)]
    config: PathBuf,
    /// Directory receiving all artifacts.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Proxy pairs to process, as comma-separated value:user tokens
    /// (price|txval and balcnt|act6m).
    #[arg(long, value_delimiter = ',', default_values_t = ProxyPair::ALL)]
    pairs: Vec<ProxyPair>,
    /// Table formats to emit, comma-separated (csv|json|md).
    #[arg(long = "format", value_delimiter = ',', default_values_t = [TableFormat::Csv])]
    formats: Vec<TableFormat>,
}

#[derive(Args)]
struct DeriveArgs {
    /// Transfer-event CSV (day,sender,receiver,amount; sorted by day).
    #[arg(long)]
    events: PathBuf,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Extend the derived range through this date (counts carry or decay).
    #[arg(long)]
    end: Option<NaiveDate>,
}

#[derive(Args)]
struct SynthArgs {
    /// Growth law: linear | nlogn | metcalfe | exponential | noise.
    #[arg(long)]
    law: GrowthLaw,
    #[arg(long, default_value_t = 365)]
    days: u32,
    /// Initial user base.
    #[arg(long, default_value_t = 1000.0)]
    u0: f64,
    /// Per-day user-base multiplier.
    #[arg(long, default_value_t = 1.01)]
    growth: f64,
    /// Lognormal sigma multiplied onto the value columns; 0 = noiseless.
    #[arg(long, default_value_t = 0.0)]
    noise_sigma: f64,
    /// Series CSV output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the matching transfer-event log here.
    #[arg(long)]
    events_out: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    /// Classification CSV produced by `run` (date,delta_v,delta_u,class).
    #[arg(long)]
    input: PathBuf,
    /// SVG output file.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "")]
    title: String,
    #[arg(long, default_value_t = 900)]
    width: u32,
    #[arg(long, default_value_t = 300)]
    height: u32,
    /// Stem-height scale: linear | symlog.
    #[arg(long, default_value_t)]
    y_scale: YScale,
}

#[derive(Args)]
struct TableArgs {
    /// TOML file listing the assets to process.
    #[arg(long)]
    config: PathBuf,
    /// Which table to print.
    #[arg(long, value_enum, default_value_t = TableKind::All)]
    kind: TableKind,
    #[arg(long, default_value_t = TableFormat::Csv)]
    format: TableFormat,
    /// Proxy pairs to include, as comma-separated value:user tokens.
    #[arg(long, value_delimiter = ',', default_values_t = ProxyPair::ALL)]
    pairs: Vec<ProxyPair>,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum TableKind {
    All,
    Aggregates,
    Correlations,
    Ratios,
}

/// Everything `run` needs to know, resolved from flags up front.
struct RunManifest {
    config_path: PathBuf,
    pairs: Vec<ProxyPair>,
    magnitude_rule: MagnitudeRule,
    window: WindowSpec,
    output_dir: PathBuf,
    formats: Vec<TableFormat>,
}

enum AppError {
    /// Unreadable, malformed, or invalid input; exit code 1.
    Input(String),
    /// Readable input from which a measurement cannot be produced; exit 2.
    Compute(String),
}

impl AppError {
    fn code(&self) -> u8 {
        match self {
            AppError::Input(_) => 1,
            AppError::Compute(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            AppError::Input(m) | AppError::Compute(m) => m,
        }
    }

    /// Prefix the asset id so every per-asset diagnostic names its asset,
    /// unless the underlying message already does.
    fn with_asset(self, asset: &str) -> AppError {
        if self.message().contains(asset) {
            return self;
        }
        match self {
            AppError::Input(m) => AppError::Input(format!("{asset}: {m}")),
            AppError::Compute(m) => AppError::Compute(format!("{asset}: {m}")),
        }
    }
}

impl From<nfx::ingest::IngestError> for AppError {
    fn from(e: nfx::ingest::IngestError) -> Self {
        AppError::Input(e.to_string())
    }
}

impl From<nfx::ledger::LedgerError> for AppError {
    fn from(e: nfx::ledger::LedgerError) -> Self {
        AppError::Input(e.to_string())
    }
}

impl From<nfx::synth::SynthError> for AppError {
    fn from(e: nfx::synth::SynthError) -> Self {
        AppError::Input(e.to_string())
    }
}

impl From<nfx::classify::ClassifyError> for AppError {
    fn from(e: nfx::classify::ClassifyError) -> Self {
        AppError::Input(e.to_string())
    }
}

impl From<nfx::report::ReportError> for AppError {
    fn from(e: nfx::report::ReportError) -> Self {
        AppError::Input(e.to_string())
    }
}

impl From<nfx::aggregate::AggregateError> for AppError {
    fn from(e: nfx::aggregate::AggregateError) -> Self {
        AppError::Compute(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), AppError> {
    let g = cli.globals;
    match cli.command {
        Command::Run(args) => cmd_run(args, &g),
        Command::Validate { config } => cmd_validate(&config, &g),
        Command::Derive(args) => cmd_derive(args, &g),
        Command::Synth(args) => cmd_synth(args, &g),
        Command::Plot(args) => cmd_plot(args, &g),
        Command::Table(args) => cmd_table(args, &g),
    }
}

fn window_spec(g: &Globals) -> Result<WindowSpec, AppError> {
    WindowSpec::new(g.window_days)
        .ok_or_else(|| AppError::Input("--window-days must be at least 1".to_string()))
}

/// Drop repeated entries, keeping first occurrences in order.
fn dedup<T: PartialEq + Copy>(items: Vec<T>) -> Vec<T> {
    let mut out: Vec<T> = Vec::with_capacity(items.len());
    for item in items {
        if !out.contains(&item) {
            out.push(item);
        }
    }
    out
}

/// Parse one asset and, when an event log is configured, fill any proxy
/// column that the CSV left entirely empty with ledger-derived counts.
fn prepare_series(
    cfg: &AssetConfig,
    g: &Globals,
    window: WindowSpec,
) -> Result<(AssetSeries, Vec<nfx::ingest::ValidationIssue>), AppError> {
    let options = ParseOptions {
        fill_gaps: g.fill_gaps,
    };
    let mut series = parse_series(&cfg.source_path, cfg, &options)?;
    fill_from_events(&mut series, cfg, window)?;
    let issues = validate_series(&series);
    Ok((series, issues))
}

fn fill_from_events(
    series: &mut AssetSeries,
    cfg: &AssetConfig,
    window: WindowSpec,
) -> Result<(), AppError> {
    let Some(events_path) = &cfg.events_path else {
        return Ok(());
    };
    let all_none = |col: &[Option<f64>]| col.iter().all(Option::is_none);
    let need_bal = all_none(&series.adr_bal_cnt);
    let need_act = all_none(&series.adr_act_cnt);
    let need_six = series
        .six_m_adr_act_cnt
        .as_deref()
        .is_none_or(all_none);
    if !(need_bal || need_act || need_six) {
        return Ok(());
    }
    let asset = &series.asset_id;
    let ctx = |e: nfx::ledger::LedgerError| AppError::Input(format!("{asset}: {e}"));
    let events = load_events(events_path).map_err(ctx)?;
    let end = *series.dates.last().expect("parsed series is nonempty");
    if need_bal {
        let counts = derive_balance_counts_through(events.clone(), end).map_err(ctx)?;
        series.adr_bal_cnt = align_counts(&series.dates, &counts);
    }
    if need_act || need_six {
        let counts = derive_active_counts_through(events, window, end).map_err(ctx)?;
        if need_act {
            series.adr_act_cnt = align_counts(&series.dates, &counts.daily);
        }
        if need_six {
            series.six_m_adr_act_cnt = Some(align_counts(&series.dates, &counts.windowed));
        }
    }
    Ok(())
}

/// Project derived per-day counts onto the series dates. Days before the
/// first ledger event are provably zero; days past the derived range cannot
/// occur because derivation was extended through the series end.
fn align_counts(dates: &[NaiveDate], counts: &[(NaiveDate, u64)]) -> Vec<Option<f64>> {
    let Some(&(first, _)) = counts.first() else {
        return vec![Some(0.0); dates.len()];
    };
    dates
        .iter()
        .map(|d| {
            let offset = d.signed_duration_since(first).num_days();
            if offset < 0 {
                Some(0.0)
            } else {
                counts.get(offset as usize).map(|&(_, c)| c as f64)
            }
        })
        .collect()
}

/// Parse, derive, validate, classify, and aggregate every asset. Assets are
/// processed concurrently; outputs keep configuration order regardless of
/// scheduling. Fatal validation findings abort with the asset named.
#[allow(clippy::type_complexity)]
fn compute_assets(
    configs: &[AssetConfig],
    pairs: &[ProxyPair],
    g: &Globals,
    window: WindowSpec,
    rule: MagnitudeRule,
) -> Result<
    (
        Vec<AssetSeries>,
        Vec<NfxAggregate>,
        Vec<(String, ProxyPair, Vec<DailyNfx>)>,
    ),
    AppError,
> {
    type PerAsset = (
        AssetSeries,
        Vec<NfxAggregate>,
        Vec<(ProxyPair, Vec<DailyNfx>)>,
        Vec<String>,
    );
    let results: Vec<Result<PerAsset, AppError>> = configs
        .par_iter()
        .map(|cfg| {
            let (series, issues) =
                prepare_series(cfg, g, window).map_err(|e| e.with_asset(&cfg.asset_id))?;
            if let Some(fatal) = issues.iter().find(|i| i.fatal) {
                return Err(AppError::Input(format!("{}: {}", cfg.asset_id, fatal)));
            }
            let warnings = issues
                .iter()
                .map(|i| format!("{}: {}", cfg.asset_id, i))
                .collect();
            let mut aggs = Vec::with_capacity(pairs.len());
            let mut classified = Vec::with_capacity(pairs.len());
            for &pair in pairs {
                let days = classify_series(&series, pair)?;
                aggs.push(aggregate(&cfg.asset_id, pair, &days, rule)?);
                classified.push((pair, days));
            }
            Ok((series, aggs, classified, warnings))
        })
        .collect();

    let mut all_series = Vec::with_capacity(configs.len());
    let mut all_aggs = Vec::new();
    let mut all_days = Vec::new();
    for result in results {
        let (series, aggs, classified, warnings) = result?;
        for warning in warnings {
            eprintln!("warning: {warning}");
        }
        for (pair, days) in classified {
            all_days.push((series.asset_id.clone(), pair, days));
        }
        all_series.push(series);
        all_aggs.extend(aggs);
    }
    Ok((all_series, all_aggs, all_days))
}

/// Keep only correlation entries for the selected proxy pairs.
fn restrict_table(table: CorrelationTable, pairs: &[ProxyPair]) -> CorrelationTable {
    let keep = |v: ValueProxy, u: UserProxy| pairs.contains(&ProxyPair::new(v, u));
    CorrelationTable {
        cells: table
            .cells
            .into_iter()
            .filter(|c| keep(c.value_proxy, c.user_proxy))
            .collect(),
        absences: table
            .absences
            .into_iter()
            .filter(|a| keep(a.value_proxy, a.user_proxy))
            .collect(),
    }
}

fn cmd_run(args: RunArgs, g: &Globals) -> Result<(), AppError> {
    let manifest = RunManifest {
        config_path: args.config,
        pairs: dedup(args.pairs),
        magnitude_rule: g.magnitude_rule,
        window: window_spec(g)?,
        output_dir: args.out,
        formats: dedup(args.formats),
    };
    let configs = load_config(&manifest.config_path)?;
    let (series_list, aggregates, classified) = compute_assets(
        &configs,
        &manifest.pairs,
        g,
        manifest.window,
        manifest.magnitude_rule,
    )?;

    // Build the whole output tree in memory first so a failure anywhere
    // leaves no partial artifacts behind.
    let mut files: Vec<(PathBuf, String)> = Vec::new();
    for (asset, pair, days) in &classified {
        let stem = format!("{}_{}", asset, pair.file_stem());
        files.push((
            PathBuf::from(format!("classified/{stem}.csv")),
            classified_to_csv(days),
        ));
        let plot = StemPlotSpec {
            title: format!("{asset} {pair}"),
            magnitude_rule: manifest.magnitude_rule,
            ..StemPlotSpec::default()
        };
        files.push((
            PathBuf::from(format!("plots/{stem}.svg")),
            render_stemplot(days, &plot)?,
        ));
    }
    let table = restrict_table(
        correlation_table(
            &series_list,
            CorrelateOptions {
                log_levels: g.log_levels,
            },
        ),
        &manifest.pairs,
    );
    for &format in &manifest.formats {
        files.push((
            PathBuf::from(format!("tables/aggregates.{}", format.extension())),
            render_aggregates(&aggregates, format),
        ));
        files.push((
            PathBuf::from(format!("tables/correlations.{}", format.extension())),
            render_correlations(&table, format),
        ));
    }
    write_tree(&manifest.output_dir, &files)?;
    eprintln!(
        "wrote {} files under {}",
        files.len(),
        manifest.output_dir.display()
    );
    Ok(())
}

/// Write every file, creating directories as needed; on the first failure,
/// remove everything written so far and report the failing path.
fn write_tree(root: &Path, files: &[(PathBuf, String)]) -> Result<(), AppError> {
    let mut written: Vec<PathBuf> = Vec::with_capacity(files.len());
    for (rel, content) in files {
        let path = root.join(rel);
        let attempt = (|| {
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(&path, content)
        })();
        if let Err(e) = attempt {
            for earlier in &written {
                let _ = std::fs::remove_file(earlier);
            }
            return Err(AppError::Input(format!("{}: {}", path.display(), e)));
        }
        written.push(path);
    }
    Ok(())
}

fn cmd_validate(config: &Path, g: &Globals) -> Result<(), AppError> {
    let window = window_spec(g)?;
    let configs = load_config(config)?;
    let mut failures = 0usize;
    for cfg in &configs {
        match prepare_series(cfg, g, window).map_err(|e| e.with_asset(&cfg.asset_id)) {
            Ok((_, issues)) => {
                if issues.is_empty() {
                    println!("{}: clean", cfg.asset_id);
                }
                for issue in &issues {
                    println!("{}: {}", cfg.asset_id, issue);
                    if issue.fatal {
                        failures += 1;
                    }
                }
            }
            Err(e) => {
                eprintln!("error: {}", e.message());
                failures += 1;
            }
        }
    }
    if failures > 0 {
        Err(AppError::Input(format!(
            "validation failed for {failures} asset{}",
            if failures == 1 { "" } else { "s" }
        )))
    } else {
        Ok(())
    }
}

fn cmd_derive(args: DeriveArgs, g: &Globals) -> Result<(), AppError> {
    let window = window_spec(g)?;
    let events = load_events(&args.events)?;
    let balances = derive_balance_counts_through(events.clone(), args.end)?;
    let active = derive_active_counts_through(events, window, args.end)?;
    let mut out = String::from("time,AdrBalCnt,AdrActCnt,6MAdrActCnt\n");
    for ((&(date, bal), &(_, daily)), &(_, windowed)) in balances
        .iter()
        .zip(&active.daily)
        .zip(&active.windowed)
    {
        let _ = writeln!(out, "{date},{bal},{daily},{windowed}");
    }
    emit(args.out.as_deref(), &out)
}

fn cmd_synth(args: SynthArgs, g: &Globals) -> Result<(), AppError> {
    let spec = SynthSpec {
        law: args.law,
        days: args.days,
        u0: args.u0,
        growth: args.growth,
        noise_sigma: args.noise_sigma,
        seed: g.seed,
    };
    let series = generate(&spec)?;
    if let Some(events_out) = &args.events_out {
        let events = generate_ledger(&spec)?;
        std::fs::write(events_out, events_to_csv_string(&events))
            .map_err(|e| AppError::Input(format!("{}: {}", events_out.display(), e)))?;
    }
    emit(args.out.as_deref(), &series.to_csv_string())
}

fn cmd_plot(args: PlotArgs, g: &Globals) -> Result<(), AppError> {
    let text = std::fs::read_to_string(&args.input)
        .map_err(|e| AppError::Input(format!("{}: {}", args.input.display(), e)))?;
    let days = classified_from_csv(&text)?;
    let plot = StemPlotSpec {
        width_px: args.width,
        height_px: args.height,
        y_scale: args.y_scale,
        title: args.title,
        magnitude_rule: g.magnitude_rule,
        ..StemPlotSpec::default()
    };
    let svg = render_stemplot(&days, &plot)?;
    std::fs::write(&args.out, svg)
        .map_err(|e| AppError::Input(format!("{}: {}", args.out.display(), e)))
}

fn cmd_table(args: TableArgs, g: &Globals) -> Result<(), AppError> {
    let window = window_spec(g)?;
    let pairs = dedup(args.pairs);
    let configs = load_config(&args.config)?;
    let (series_list, aggregates, _) =
        compute_assets(&configs, &pairs, g, window, g.magnitude_rule)?;
    let correlations = || {
        restrict_table(
            correlation_table(
                &series_list,
                CorrelateOptions {
                    log_levels: g.log_levels,
                },
            ),
            &pairs,
        )
    };
    let text = match args.kind {
        TableKind::All => {
            let table = correlations();
            emit_tables(&aggregates, &table.cells, args.format)
        }
        TableKind::Aggregates => render_aggregates(&aggregates, args.format),
        TableKind::Correlations => render_correlations(&correlations(), args.format),
        TableKind::Ratios => render_ratios(&ratio_rows(&configs, &aggregates)?, args.format),
    };
    print!("{text}");
    Ok(())
}

/// Positive/reverse strength ratios of price-based to transaction-based
/// measurements, one row per asset and user proxy where both sides exist.
fn ratio_rows(
    configs: &[AssetConfig],
    aggregates: &[NfxAggregate],
) -> Result<Vec<RatioRow>, AppError> {
    let mut rows = Vec::new();
    for cfg in configs {
        for user in UserProxy::ALL {
            let find = |value: ValueProxy| {
                aggregates.iter().find(|a| {
                    a.asset_id == cfg.asset_id && a.pair == ProxyPair::new(value, user)
                })
            };
            if let (Some(price), Some(txval)) = (
                find(ValueProxy::TokenPrice),
                find(ValueProxy::TransactionValue),
            ) {
                let ratio = strength_ratio(price, txval)?;
                rows.push(RatioRow::new(&cfg.asset_id, user, ratio));
            }
        }
    }
    Ok(rows)
}

fn emit(path: Option<&Path>, content: &str) -> Result<(), AppError> {
    match path {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| AppError::Input(format!("{}: {}", path.display(), e))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}
