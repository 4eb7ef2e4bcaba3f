//! End-to-end study: ingest, descriptive statistics, regime split, model
//! fits, post-surge analysis, forecasting, spike probabilities and welfare,
//! written as a directory of deterministic artifacts plus a manifest.

mod config;
mod report;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use config::{Bound, PriceRange, RunConfig};
pub use report::{
    acf_csv, forecast_csv, format_equation, hourly_csv, pairs_csv, response_csv, spike_csv, summary_text, welfare_csv,
};

use crate::error::{Error, Result};
use crate::forecast::{forecast_targets, residual_diagnostics, ForecastResult, ResidualDiagnostics};
use crate::ingest::{align, filter_workdays, parse_csv, AlignedSeries, Calendar, ParseOptions, RowDiagnostic};
use crate::spikeprob::{conditional_spike_prob, SpikeCondition, SpikeProbProfile};
use crate::stats::{
    acf, anova_oneway, avg_change_after_surge, hourly_summary, lagged_correlation, moments, normal_probability_plot,
    pacf, post_event_groups, surge_events, AcfResult, AnovaTable, HourlySummary, Masked, MomentStats,
    SeriesField,
};
use crate::sysid::{
    cross_validate, joint_arx, moderate_rows, peak_rows, select_lags, split_regimes, stability, two_step_arx,
    ArxSpec, CvResult, JointFit, LagCriterion, LagSelection, StabilityReport, TransferFunction, TwoStepFit,
};
use crate::welfare::{dwl_series, DwlSeries, MarketScenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Config,
    Ingest,
    Stats,
    Split,
    Fit,
    Anova,
    Response,
    Forecast,
    Spikeprob,
    Welfare,
    Report,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).ok();
        f.write_str(s.as_ref().and_then(|v| v.as_str()).unwrap_or("unknown"))
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{stage} stage failed")]
pub struct PipelineError {
    pub stage: Stage,
    #[source]
    pub source: Error,
}

trait AtStage<V> {
    fn at(self, stage: Stage) -> std::result::Result<V, PipelineError>;
}

impl<V> AtStage<V> for Result<V> {
    fn at(self, stage: Stage) -> std::result::Result<V, PipelineError> {
        self.map_err(|source| PipelineError { stage, source })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub records: usize,
    pub rejected_rows: Vec<RowDiagnostic>,
    pub samples: usize,
    pub valid_samples: usize,
    pub input_sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub threshold: f64,
    pub moderate_samples: usize,
    pub high_samples: usize,
    pub high_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelReport {
    pub spec: ArxSpec,
    pub lag_selection: Option<LagSelection>,
    pub fit: TwoStepFit<f64>,
    pub transfer: TransferFunction<f64>,
    pub stability: StabilityReport<f64>,
    pub cross_validation: Option<CvResult<f64>>,
    pub joint: Option<JointFit<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaReport {
    pub events: usize,
    pub group_sizes: Vec<usize>,
    pub group_means: Vec<f64>,
    pub table: AnovaTable<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResponseRow {
    pub lag: usize,
    pub avg_change: Option<f64>,
    pub correlation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastReport {
    pub result: ForecastResult<f64>,
    pub diagnostics: ResidualDiagnostics<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpikeReport {
    pub range: PriceRange,
    pub profile: SpikeProbProfile<f64>,
}

/// Every numerical result of a study.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Study {
    pub price_moments: MomentStats<f64>,
    pub load_moments: MomentStats<f64>,
    pub load_acf: AcfResult<f64>,
    pub load_pacf: AcfResult<f64>,
    pub price_hourly: HourlySummary<f64>,
    pub load_hourly: HourlySummary<f64>,
    pub load_probability_plot: Vec<(f64, f64)>,
    pub regime: RegimeReport,
    pub moderate: ModelReport,
    pub peak: ModelReport,
    pub anova: AnovaReport,
    pub response: Vec<ResponseRow>,
    pub forecast: ForecastReport,
    pub spikes: Vec<SpikeReport>,
    pub welfare: Option<DwlSeries<f64>>,
    /// Optional sub-analyses that could not be computed.
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config_sha256: String,
    pub input_sha256: Option<String>,
    pub status: String,
    pub failed_stage: Option<Stage>,
    pub error: Option<String>,
    pub artifacts: Vec<Artifact>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub study: Study,
    pub manifest: Manifest,
    pub output_dir: PathBuf,
}

/// Reads, aligns and workday-filters the configured input file.
pub fn load_series(config: &RunConfig) -> std::result::Result<(AlignedSeries<f64>, IngestReport), PipelineError> {
    let path = config
        .input
        .as_ref()
        .ok_or_else(|| Error::InvalidSpec("no input file configured".into()))
        .at(Stage::Ingest)?;
    let bytes = fs::read(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
        .at(Stage::Ingest)?;
    let options = ParseOptions {
        interval_mins: config.interval_mins,
        lenient: config.lenient,
        market_utc_offset_mins: config.market_utc_offset_mins,
    };
    let parsed = parse_csv::<f64, _>(bytes.as_slice(), &config.columns, &options).at(Stage::Ingest)?;
    let aligned = align(&parsed.records, config.interval_mins).at(Stage::Ingest)?;
    let calendar = Calendar {
        exclude_weekends: config.exclude_weekends,
        holidays: config.holidays.iter().copied().collect(),
    };
    let series = filter_workdays(&aligned, &calendar);
    if series.valid_count() == 0 {
        return Err(Error::EmptySeries).at(Stage::Ingest);
    }
    let report = IngestReport {
        records: parsed.records.len(),
        rejected_rows: parsed.diagnostics,
        samples: series.len(),
        valid_samples: series.valid_count(),
        input_sha256: config::hex(&Sha256::digest(&bytes)),
    };
    Ok((series, report))
}

fn fit_model(
    series: &AlignedSeries<f64>,
    spec: &ArxSpec,
    rows: &[usize],
    config: &RunConfig,
    lag_selection: Option<LagSelection>,
    label: &str,
    warnings: &mut Vec<String>,
) -> Result<ModelReport> {
    let fit = two_step_arx(series, spec, Some(rows))?;
    let transfer = fit.model.to_transfer_function();
    let stability = if spec.ar_lags.is_empty() {
        StabilityReport {
            roots_re: vec![],
            roots_im: vec![],
            moduli: vec![],
            max_modulus: 0.0,
            stable: true,
            marginal: false,
        }
    } else {
        self::stability(&transfer)?
    };
    let cross_validation = match cross_validate(series, spec, config.cv_fraction, config.seed, Some(rows)) {
        Ok(cv) => Some(cv),
        Err(e) => {
            warnings.push(format!("{label} cross-validation: {e}"));
            None
        }
    };
    let joint = if config.joint {
        match joint_arx(series, spec, Some(rows)) {
            Ok(j) => Some(j),
            Err(e) => {
                warnings.push(format!("{label} joint fit: {e}"));
                None
            }
        }
    } else {
        None
    };
    Ok(ModelReport { spec: spec.clone(), lag_selection, fit, transfer, stability, cross_validation, joint })
}

/// Runs every analysis stage on an already-loaded series.
pub fn analyze(series: &AlignedSeries<f64>, config: &RunConfig) -> std::result::Result<Study, PipelineError> {
    config.validate().at(Stage::Config)?;
    let mut warnings = Vec::new();

    let price_moments = moments(series.prices_masked()).at(Stage::Stats)?;
    let load_moments = moments(series.loads_masked()).at(Stage::Stats)?;
    let load_acf = acf(series.loads_masked(), config.acf_max_lag).at(Stage::Stats)?;
    let load_pacf = pacf(series.loads_masked(), config.acf_max_lag).at(Stage::Stats)?;
    let price_hourly = hourly_summary(series, SeriesField::Price, config.hourly_bucket_mins).at(Stage::Stats)?;
    let load_hourly = hourly_summary(series, SeriesField::Load, config.hourly_bucket_mins).at(Stage::Stats)?;
    let load_probability_plot = normal_probability_plot(series.loads_masked()).at(Stage::Stats)?;

    let split = split_regimes(series, config.regime).at(Stage::Split)?;
    let threshold = split.threshold;
    let regime = RegimeReport {
        threshold,
        moderate_samples: split.moderate.len(),
        high_samples: split.high.len(),
        high_fraction: split.high_fraction(),
    };

    let mod_rows = moderate_rows(series, threshold, &config.moderate.x_lags);
    let (moderate_spec, lag_selection) = match config.tprune_threshold {
        Some(t) => {
            let sel = select_lags(series, config.tprune_max_lag, &LagCriterion::TPrune { threshold: t }, Some(&mod_rows))
                .at(Stage::Fit)?;
            let spec = ArxSpec::new(&sel.lags, &config.moderate.x_lags, config.moderate.transform).at(Stage::Fit)?;
            (spec, Some(sel))
        }
        None => (config.moderate.clone(), None),
    };
    let moderate =
        fit_model(series, &moderate_spec, &mod_rows, config, lag_selection, "moderate", &mut warnings).at(Stage::Fit)?;
    let anchor = config.peak.x_lags.iter().copied().max().unwrap_or(0);
    let pk_rows = peak_rows(series, threshold, config.peak_window, anchor, config.surge_days_only);
    let peak = fit_model(series, &config.peak, &pk_rows, config, None, "peak", &mut warnings).at(Stage::Fit)?;

    let onsets = surge_events(series, threshold, true);
    let groups = post_event_groups(series, &onsets, config.response_max_lag);
    let table = anova_oneway(&groups).at(Stage::Anova)?;
    let anova = AnovaReport {
        events: onsets.len(),
        group_sizes: groups.iter().map(Vec::len).collect(),
        group_means: groups.iter().map(|g| g.iter().sum::<f64>() / g.len() as f64).collect(),
        table,
    };

    let transform = config.peak.transform;
    let (x_values, x_mask): (Vec<f64>, Vec<bool>) = (0..series.len())
        .map(|i| match transform.apply(series.prices[i]) {
            Some(v) if series.is_valid(i) => (v, true),
            _ => (0.0, false),
        })
        .unzip();
    let x = Masked::new(&x_values, &x_mask);
    let p_max = series.valid_prices().into_iter().fold(f64::NEG_INFINITY, f64::max);
    let response = (0..=config.response_max_lag)
        .map(|k| ResponseRow {
            lag: k,
            avg_change: avg_change_after_surge(series, threshold, p_max, k).ok(),
            correlation: lagged_correlation(&onsets, x, series.loads_masked(), k).ok(),
        })
        .collect();

    let result = forecast_targets(&peak.fit.model, series, &pk_rows, config.forecast_mode).at(Stage::Forecast)?;
    let diagnostics = residual_diagnostics(&result).at(Stage::Forecast)?;
    let forecast = ForecastReport { result, diagnostics };

    let delays: Vec<usize> = (1..=config.spike_max_delay).collect();
    let mut spikes = Vec::new();
    for &window in &config.spike_windows {
        for &range in &config.spike_ranges {
            let (low, high) = range.resolve(series.prices_masked()).at(Stage::Spikeprob)?;
            let condition = SpikeCondition { window, low, high };
            let profile = conditional_spike_prob(series, condition, &delays, threshold).at(Stage::Spikeprob)?;
            spikes.push(SpikeReport { range, profile });
        }
    }

    let welfare = match &config.welfare_scenario {
        Some(path) => Some(run_welfare(path, config).at(Stage::Welfare)?),
        None => None,
    };

    Ok(Study {
        price_moments,
        load_moments,
        load_acf,
        load_pacf,
        price_hourly,
        load_hourly,
        load_probability_plot,
        regime,
        moderate,
        peak,
        anova,
        response,
        forecast,
        spikes,
        welfare,
        warnings,
    })
}

/// Reads a JSON array of market intervals and evaluates the configured policy.
pub fn run_welfare(path: &Path, config: &RunConfig) -> Result<DwlSeries<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let schedule: Vec<MarketScenario<f64>> =
        serde_json::from_str(&text).map_err(|e| Error::InvalidSpec(format!("{}: {e}", path.display())))?;
    dwl_series(&schedule, config.welfare_policy, Some(config.interval_mins as f64 / 60.0))
}

struct Writer {
    dir: PathBuf,
    artifacts: Vec<Artifact>,
}

impl Writer {
    fn put(&mut self, name: &str, bytes: Vec<u8>) -> Result<()> {
        fs::write(self.dir.join(name), &bytes).map_err(|e| Error::Io(format!("{name}: {e}")))?;
        self.artifacts.push(Artifact {
            path: name.to_string(),
            sha256: config::hex(&Sha256::digest(&bytes)),
            bytes: bytes.len(),
        });
        Ok(())
    }

    fn json<V: Serialize>(&mut self, name: &str, value: &V) -> Result<()> {
        let mut text = serde_json::to_vec_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
        text.push(b'\n');
        self.put(name, text)
    }
}

fn write_study(w: &mut Writer, study: &Study, config: &RunConfig) -> Result<()> {
    w.json("moments.json", &serde_json::json!({ "price": study.price_moments, "load": study.load_moments }))?;
    w.put("acf.csv", report::acf_csv(&study.load_acf, &study.load_pacf)?)?;
    w.put("hourly.csv", report::hourly_csv(&[&study.price_hourly, &study.load_hourly])?)?;
    w.put("probability_plot.csv", report::pairs_csv(["theoretical", "load"], &study.load_probability_plot)?)?;
    w.json("regime.json", &study.regime)?;
    w.json("moderate_fit.json", &study.moderate)?;
    w.put("moderate_model.json", study.moderate.fit.model.to_json()?.into_bytes())?;
    w.json("peak_fit.json", &study.peak)?;
    w.put("peak_model.json", study.peak.fit.model.to_json()?.into_bytes())?;
    w.json("anova.json", &study.anova)?;
    w.put("surge_response.csv", report::response_csv(&study.response)?)?;
    w.put("forecast.csv", report::forecast_csv(&study.forecast.result)?)?;
    w.json("forecast_diagnostics.json", &study.forecast.diagnostics)?;
    w.put("spikeprob.csv", report::spike_csv(&study.spikes)?)?;
    if let Some(welfare) = &study.welfare {
        w.put("welfare.csv", report::welfare_csv(welfare)?)?;
        w.json("welfare.json", welfare)?;
    }
    w.put("summary.txt", summary_text(study, config).into_bytes())?;
    Ok(())
}

/// Runs the full study and writes its artifacts to `config.output_dir`.
/// A `manifest.json` is written on success and on failure.
pub fn run_pipeline(config: &RunConfig) -> std::result::Result<RunOutcome, PipelineError> {
    let dir = config.output_dir.clone();
    fs::create_dir_all(&dir)
        .map_err(|e| Error::Io(format!("{}: {e}", dir.display())))
        .at(Stage::Report)?;
    let mut w = Writer { dir: dir.clone(), artifacts: Vec::new() };
    let mut input_sha256 = None;
    let result = (|| {
        config.validate().at(Stage::Config)?;
        let (series, ingest) = load_series(config)?;
        input_sha256 = Some(ingest.input_sha256.clone());
        w.json("ingest.json", &ingest).at(Stage::Report)?;
        let mut cleaned = Vec::new();
        series.write_csv(&mut cleaned).at(Stage::Report)?;
        w.put("cleaned.csv", cleaned).at(Stage::Report)?;
        let study = analyze(&series, config)?;
        write_study(&mut w, &study, config).at(Stage::Report)?;
        Ok(study)
    })();
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_sha256: config.fingerprint(),
        input_sha256,
        status: if result.is_ok() { "ok" } else { "failed" }.to_string(),
        failed_stage: result.as_ref().err().map(|e: &PipelineError| e.stage),
        error: result.as_ref().err().map(|e| e.source.to_string()),
        artifacts: w.artifacts.clone(),
    };
    w.json("manifest.json", &manifest).at(Stage::Report)?;
    let study = result?;
    Ok(RunOutcome { study, manifest, output_dir: dir })
}
