use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};

use pricedemand::forecast::{forecast_targets, residual_diagnostics, ForecastMode};
use pricedemand::ingest::{ColumnMapping, TodWindow};
use pricedemand::pipeline::{self, load_series, run_pipeline, PriceRange, RunConfig, SpikeReport};
use pricedemand::spikeprob::{conditional_spike_prob, SpikeCondition};
use pricedemand::stats::{
    acf, anova_oneway, hourly_summary, moments, pacf, post_event_groups, quantile, surge_events, SeriesField,
};
use pricedemand::synth::{gen_demand, gen_prices, to_series, PlantSpec, PriceProcessSpec};
use pricedemand::sysid::{
    fit_ar, joint_arx, moderate_rows, peak_rows, split_regimes, two_step_arx, ArxModel, ArxSpec, InputTransform,
    ThresholdRule,
};
use pricedemand::welfare::{dwl_series, MarketScenario, Policy};
use pricedemand::Series;

/// Identification of price-responsive electricity demand from
/// price/load interval data.
#[derive(Parser)]
#[command(name = "pricedemand", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse, align and workday-filter a CSV file.
    Ingest {
        #[command(flatten)]
        input: InputArgs,
        /// Write the aligned series here (`valid` column marks masked samples).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Descriptive statistics.
    Stats {
        #[command(subcommand)]
        command: StatsCommand,
    },
    /// Fit a load model.
    Fit {
        #[command(subcommand)]
        command: FitCommand,
    },
    /// Forecast loads with a fitted model and score the forecasts.
    Forecast {
        #[arg(long)]
        model: PathBuf,
        /// Price/load history; targets with a complete lag window are forecast.
        #[arg(long)]
        history: PathBuf,
        /// Steps ahead; 1 gives one-step predictions from realized loads.
        #[arg(long, default_value_t = 1)]
        horizon: usize,
        #[command(flatten)]
        format: FormatArgs,
        /// Forecast CSV (t, forecast, realized, residual).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Residual diagnostics JSON; printed when omitted.
        #[arg(long)]
        diagnostics: Option<PathBuf>,
    },
    /// Probability of a spike k steps after conditioning prices.
    Spikeprob {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        threshold: ThresholdArgs,
        #[arg(long, default_value = "09:00-15:00")]
        window: TodWindow,
        /// `low:high`, each a price or a `qNN` percentile.
        #[arg(long, default_value = "q95:q100")]
        range: PriceRange,
        #[arg(long, default_value_t = 24)]
        max_delay: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Deadweight loss of a retail pricing policy over a scenario schedule.
    Welfare {
        /// JSON list of {demand, supply, capacity?, p0?, event?}.
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value = "rtrp-inertia")]
        policy: PolicyArg,
        #[arg(long, default_value_t = 15)]
        interval_mins: u32,
        /// Per-interval CSV; the JSON total is printed.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate synthetic data.
    Synth {
        #[command(subcommand)]
        command: SynthCommand,
    },
    /// Run the full study described by a config file.
    Run {
        /// TOML, or JSON when the extension is `.json`.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        output_dir: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, conflicts_with = "threshold")]
        quantile: Option<f64>,
        #[arg(long)]
        threshold: Option<f64>,
        /// Also fit every model by joint least squares.
        #[arg(long)]
        joint: bool,
    },
}

#[derive(Args, Clone)]
struct InputArgs {
    /// Input CSV.
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    format: FormatArgs,
}

#[derive(Args, Clone)]
struct FormatArgs {
    #[arg(long, default_value_t = 15)]
    interval_mins: u32,
    #[arg(long, default_value = "timestamp")]
    timestamp_col: String,
    #[arg(long, default_value = "price")]
    price_col: String,
    #[arg(long, default_value = "load")]
    load_col: String,
    /// Skip malformed rows instead of failing.
    #[arg(long)]
    lenient: bool,
    /// Convert offset-carrying timestamps to this UTC offset (minutes).
    #[arg(long, allow_hyphen_values = true)]
    utc_offset_mins: Option<i32>,
    /// Keep weekends instead of masking them.
    #[arg(long)]
    all_days: bool,
}

#[derive(Args, Clone)]
struct ThresholdArgs {
    /// Regime threshold as a price quantile.
    #[arg(long, default_value_t = 0.95, conflicts_with = "threshold")]
    quantile: f64,
    /// Regime threshold in $/MWh.
    #[arg(long)]
    threshold: Option<f64>,
}

impl ThresholdArgs {
    fn rule(&self) -> ThresholdRule<f64> {
        match self.threshold {
            Some(t) => ThresholdRule::Explicit(t),
            None => ThresholdRule::Quantile(self.quantile),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Field {
    Price,
    Load,
}

impl From<Field> for SeriesField {
    fn from(f: Field) -> Self {
        match f {
            Field::Price => SeriesField::Price,
            Field::Load => SeriesField::Load,
        }
    }
}

#[derive(Subcommand)]
enum StatsCommand {
    Moments {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value = "load")]
        field: Field,
    },
    Quantile {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value = "price")]
        field: Field,
        #[arg(long, default_value_t = 0.95)]
        q: f64,
    },
    Acf {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value = "load")]
        field: Field,
        #[arg(long, default_value_t = 24)]
        max_lag: usize,
        /// CSV with acf and pacf columns; JSON is printed when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Pacf {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value = "load")]
        field: Field,
        #[arg(long, default_value_t = 24)]
        max_lag: usize,
    },
    /// Box-plot statistics per time-of-day bucket.
    Hourly {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value = "load")]
        field: Field,
        #[arg(long, default_value_t = 60)]
        bucket_mins: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One-way ANOVA of loads 0..=max-lag steps after surge onsets.
    Anova {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        threshold: ThresholdArgs,
        #[arg(long, default_value_t = 10)]
        max_lag: usize,
    },
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    threshold: ThresholdArgs,
    /// Autoregressive lags.
    #[arg(long, value_delimiter = ',')]
    lags: Option<Vec<usize>>,
    /// Price lags.
    #[arg(long, value_delimiter = ',')]
    xlags: Option<Vec<usize>>,
    /// `identity`, `log`, `log10` or `log:BASE`.
    #[arg(long)]
    transform: Option<String>,
    /// Clock window of the anchoring price (peak fits).
    #[arg(long, default_value = "14:00-14:30")]
    window: TodWindow,
    /// Peak fits use only windows whose price exceeds the threshold.
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    surge_days_only: bool,
    /// Joint least squares instead of the two-step procedure.
    #[arg(long)]
    joint: bool,
    /// Model JSON output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Fit report JSON; printed when omitted.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Subcommand)]
enum FitCommand {
    /// Pure autoregression on loads.
    Ar(FitArgs),
    /// Moderate-price ARX model.
    Arx(FitArgs),
    /// Peak-window log-price model.
    Peak(FitArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum PricePreset {
    Spiky,
    Moderate,
    LognormalPeak,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlantPreset {
    Moderate,
    Peak,
    Hybrid,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Fixed,
    RtrpInstant,
    RtrpInertia,
}

impl From<PolicyArg> for Policy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Fixed => Policy::Fixed,
            PolicyArg::RtrpInstant => Policy::RtrpInstant,
            PolicyArg::RtrpInertia => Policy::RtrpInertia,
        }
    }
}

#[derive(Subcommand)]
enum SynthCommand {
    /// Price path (load column is zero).
    Prices {
        /// Price-process JSON; overrides the preset.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "spiky")]
        preset: PricePreset,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "2015-01-05 00:00")]
        start: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Loads driven by the prices of an existing file.
    Demand {
        /// Plant JSON; overrides the preset.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "hybrid")]
        preset: PlantPreset,
        /// Overlay threshold for the hybrid preset; defaults to the 95th
        /// price percentile.
        #[arg(long)]
        threshold: Option<f64>,
        #[command(flatten)]
        prices: InputArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn config_for(format: &FormatArgs, input: &Path) -> RunConfig {
    RunConfig {
        input: Some(input.to_path_buf()),
        columns: ColumnMapping {
            timestamp: format.timestamp_col.clone(),
            price: format.price_col.clone(),
            load: format.load_col.clone(),
        },
        interval_mins: format.interval_mins,
        lenient: format.lenient,
        market_utc_offset_mins: format.utc_offset_mins,
        exclude_weekends: !format.all_days,
        ..RunConfig::default()
    }
}

fn load(args: &InputArgs) -> Result<Series> {
    load_with(&args.format, &args.input)
}

fn load_with(format: &FormatArgs, input: &Path) -> Result<Series> {
    let (series, report) = load_series(&config_for(format, input)).map_err(|e| anyhow!(e))?;
    for d in &report.rejected_rows {
        eprintln!("warning: skipped line {}: {}", d.line, d.message);
    }
    Ok(series)
}

fn print_text(text: &str) -> Result<()> {
    use std::io::Write;
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn print_json<V: serde::Serialize>(value: &V) -> Result<()> {
    print_text(&format!("{}\n", serde_json::to_string_pretty(value)?))
}

fn emit_json<V: serde::Serialize>(value: &V, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => write(p, format!("{}\n", serde_json::to_string_pretty(value)?).into_bytes()),
        None => print_json(value),
    }
}

fn write(path: &Path, bytes: Vec<u8>) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn read_json<V: serde::de::DeserializeOwned>(path: &Path) -> Result<V> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn values(series: &Series, field: Field) -> pricedemand::stats::Masked<'_, f64> {
    match field {
        Field::Price => series.prices_masked(),
        Field::Load => series.loads_masked(),
    }
}

fn parse_transform(s: &str) -> Result<InputTransform> {
    match s {
        "identity" | "none" => Ok(InputTransform::Identity),
        "log" | "ln" => Ok(InputTransform::Log),
        "log10" => Ok(InputTransform::LogBase(10.0)),
        other => match other.strip_prefix("log:").map(str::parse::<f64>) {
            Some(Ok(b)) if b > 0.0 && b != 1.0 => Ok(InputTransform::LogBase(b)),
            _ => bail!("unknown transform `{other}`"),
        },
    }
}

fn stats(cmd: StatsCommand) -> Result<()> {
    match cmd {
        StatsCommand::Moments { input, field } => {
            let s = load(&input)?;
            print_json(&moments(values(&s, field))?)
        }
        StatsCommand::Quantile { input, field, q } => {
            let s = load(&input)?;
            print_json(&serde_json::json!({ "q": q, "value": quantile(values(&s, field), q)? }))
        }
        StatsCommand::Acf { input, field, max_lag, out } => {
            let s = load(&input)?;
            let a = acf(values(&s, field), max_lag)?;
            match out {
                Some(p) => write(&p, pipeline::acf_csv(&a, &pacf(values(&s, field), max_lag)?)?),
                None => print_json(&a),
            }
        }
        StatsCommand::Pacf { input, field, max_lag } => {
            let s = load(&input)?;
            print_json(&pacf(values(&s, field), max_lag)?)
        }
        StatsCommand::Hourly { input, field, bucket_mins, out } => {
            let s = load(&input)?;
            let h = hourly_summary(&s, field.into(), bucket_mins)?;
            match out {
                Some(p) => write(&p, pipeline::hourly_csv(&[&h])?),
                None => print_json(&h),
            }
        }
        StatsCommand::Anova { input, threshold, max_lag } => {
            let s = load(&input)?;
            let split = split_regimes(&s, threshold.rule())?;
            let onsets = surge_events(&s, split.threshold, true);
            let table = anova_oneway(&post_event_groups(&s, &onsets, max_lag))?;
            print_json(&serde_json::json!({ "threshold": split.threshold, "events": onsets.len(), "table": table }))
        }
    }
}

fn fit(cmd: FitCommand) -> Result<()> {
    let (kind, args) = match cmd {
        FitCommand::Ar(a) => ("ar", a),
        FitCommand::Arx(a) => ("arx", a),
        FitCommand::Peak(a) => ("peak", a),
    };
    let s = load(&args.input)?;
    let defaults = RunConfig::default();
    let base = if kind == "peak" { defaults.peak } else { defaults.moderate };
    let lags = args.lags.clone().unwrap_or(base.ar_lags);
    let xlags = if kind == "ar" { vec![] } else { args.xlags.clone().unwrap_or(base.x_lags) };
    let transform = match &args.transform {
        Some(t) => parse_transform(t)?,
        None => base.transform,
    };
    let spec = ArxSpec::new(&lags, &xlags, transform)?;
    let split = split_regimes(&s, args.threshold.rule())?;
    let (model, report): (ArxModel<f64>, serde_json::Value) = match kind {
        "ar" => {
            let f = fit_ar(&s, &lags, None)?;
            (f.model, serde_json::to_value(&f.fit)?)
        }
        _ => {
            let rows = if kind == "peak" {
                let anchor = xlags.iter().copied().max().unwrap_or(0);
                peak_rows(&s, split.threshold, args.window, anchor, args.surge_days_only)
            } else {
                moderate_rows(&s, split.threshold, &xlags)
            };
            if args.joint {
                let f = joint_arx(&s, &spec, Some(&rows))?;
                (f.model.clone(), serde_json::to_value(&f)?)
            } else {
                let f = two_step_arx(&s, &spec, Some(&rows))?;
                let mut v = serde_json::to_value(&f)?;
                v["incremental_r2"] = serde_json::json!(f.incremental_r2());
                (f.model.clone(), v)
            }
        }
    };
    let mut report = report;
    report["threshold"] = serde_json::json!(split.threshold);
    report["equation"] = serde_json::json!(pipeline::format_equation(&model.to_transfer_function(), 4));
    if let Some(p) = &args.out {
        write(p, format!("{}\n", model.to_json()?).into_bytes())?;
    }
    emit_json(&report, args.report.as_deref())
}

fn main_inner(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest { input, out } => {
            let cfg = config_for(&input.format, &input.input);
            let (series, report) = load_series(&cfg).map_err(|e| anyhow!(e))?;
            if let Some(p) = out {
                let mut buf = Vec::new();
                series.write_csv(&mut buf)?;
                write(&p, buf)?;
            }
            print_json(&report)
        }
        Command::Stats { command } => stats(command),
        Command::Fit { command } => fit(command),
        Command::Forecast { model, history, horizon, format, out, diagnostics } => {
            let text = fs::read_to_string(&model).with_context(|| format!("reading {}", model.display()))?;
            let model = ArxModel::<f64>::from_json(&text)?;
            let s = load_with(&format, &history)?;
            let mode = if horizon == 1 { ForecastMode::OneStep } else { ForecastMode::OpenLoop { horizon } };
            let targets: Vec<usize> = (0..s.len()).collect();
            let r = forecast_targets(&model, &s, &targets, mode)?;
            if let Some(p) = out {
                write(&p, pipeline::forecast_csv(&r)?)?;
            }
            emit_json(&residual_diagnostics(&r)?, diagnostics.as_deref())
        }
        Command::Spikeprob { input, threshold, window, range, max_delay, out } => {
            let s = load(&input)?;
            let split = split_regimes(&s, threshold.rule())?;
            let (low, high) = range.resolve(s.prices_masked())?;
            let delays: Vec<usize> = (1..=max_delay).collect();
            let profile = conditional_spike_prob(&s, SpikeCondition { window, low, high }, &delays, split.threshold)?;
            let bytes = pipeline::spike_csv(&[SpikeReport { range, profile }])?;
            match out {
                Some(p) => write(&p, bytes),
                None => print_text(&String::from_utf8(bytes)?),
            }
        }
        Command::Welfare { scenario, policy, interval_mins, out } => {
            let schedule: Vec<MarketScenario<f64>> = read_json(&scenario)?;
            let s = dwl_series(&schedule, policy.into(), Some(interval_mins as f64 / 60.0))?;
            if let Some(p) = out {
                write(&p, pipeline::welfare_csv(&s)?)?;
            }
            print_json(&serde_json::json!({
                "policy": s.policy,
                "intervals": s.intervals.len(),
                "total": s.total,
                "total_dollars": s.total_dollars,
            }))
        }
        Command::Synth { command } => synth(command),
        Command::Run { config, input, output_dir, seed, quantile, threshold, joint } => {
            let mut cfg = match &config {
                Some(p) => RunConfig::from_path(p)?,
                None => RunConfig::default(),
            };
            if input.is_some() {
                cfg.input = input;
            }
            if let Some(d) = output_dir {
                cfg.output_dir = d;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(q) = quantile {
                cfg.regime = ThresholdRule::Quantile(q);
            }
            if let Some(t) = threshold {
                cfg.regime = ThresholdRule::Explicit(t);
            }
            cfg.joint |= joint;
            let outcome = run_pipeline(&cfg).map_err(|e| anyhow!("stage {}: {}", e.stage, e.source))?;
            for w in &outcome.study.warnings {
                eprintln!("warning: {w}");
            }
            print_text(&format!("{}\n", outcome.output_dir.join("summary.txt").display()))
        }
    }
}

fn synth(cmd: SynthCommand) -> Result<()> {
    match cmd {
        SynthCommand::Prices { spec, preset, n, seed, start, out } => {
            let spec = match spec {
                Some(p) => read_json(&p)?,
                None => match preset {
                    PricePreset::Spiky => PriceProcessSpec::spiky(),
                    PricePreset::Moderate => PriceProcessSpec::moderate(),
                    PricePreset::LognormalPeak => PriceProcessSpec::lognormal_peak(),
                },
            };
            let start = pricedemand::ingest::parse_timestamp(&start, None)?;
            let prices = gen_prices(&spec, n, seed)?;
            let series = to_series(start, spec.interval_mins, prices, vec![0.0; n])?;
            let mut buf = Vec::new();
            series.write_csv(&mut buf)?;
            write(&out, buf)
        }
        SynthCommand::Demand { spec, preset, threshold, prices, seed, out } => {
            let mut format = prices.format.clone();
            format.all_days = true;
            let s = load_with(&format, &prices.input)?;
            if s.valid_count() != s.len() {
                bail!("price file has gaps; demand synthesis needs a complete path");
            }
            let plant = match spec {
                Some(p) => read_json(&p)?,
                None => match preset {
                    PlantPreset::Moderate => PlantSpec::moderate(),
                    PlantPreset::Peak => PlantSpec::peak(),
                    PlantPreset::Hybrid => {
                        let thr = match threshold {
                            Some(t) => t,
                            None => quantile(s.prices_masked(), 0.95)?,
                        };
                        PlantSpec::hybrid(thr)
                    }
                },
            };
            let loads = gen_demand(&plant, &s.prices, seed)?;
            let mut series = to_series(s.start, s.interval_mins, s.prices.clone(), loads)?;
            let negative: Vec<usize> = (0..series.len()).filter(|&i| series.loads[i] < 0.0).collect();
            for &i in &negative {
                series.mask[i] = false;
            }
            if !negative.is_empty() {
                eprintln!("note: {} samples with negative load written as gaps", negative.len());
            }
            let mut buf = Vec::new();
            series.write_csv(&mut buf)?;
            write(&out, buf)
        }
    }
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
