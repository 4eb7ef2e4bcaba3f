use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forecast::ForecastMode;
use crate::ingest::{ColumnMapping, TodWindow};
use crate::stats::{quantile, Masked};
use crate::sysid::{ArxSpec, InputTransform, ThresholdRule};
use crate::welfare::Policy;

/// One end of a conditioning price band: an empirical quantile of the
/// valid prices or a literal $/MWh level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    Quantile(f64),
    Price(f64),
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Quantile(q) => write!(f, "q{}", q * 100.0),
            Bound::Price(p) => write!(f, "{p}"),
        }
    }
}

impl FromStr for Bound {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidSpec(format!("bad price bound `{s}`"));
        match s.strip_prefix('q') {
            Some(pct) => {
                let q: f64 = pct.parse().map_err(|_| bad())?;
                if !(0.0..=100.0).contains(&q) {
                    return Err(bad());
                }
                Ok(Bound::Quantile(q / 100.0))
            }
            None => s.parse().map(Bound::Price).map_err(|_| bad()),
        }
    }
}

/// `low:high`, e.g. `q90:q100` or `144.42:inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct PriceRange {
    pub low: Bound,
    pub high: Bound,
}

impl fmt::Display for PriceRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.low, self.high)
    }
}

impl FromStr for PriceRange {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (lo, hi) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidSpec(format!("price range `{s}` needs the form low:high")))?;
        Ok(Self { low: lo.trim().parse()?, high: hi.trim().parse()? })
    }
}

impl PriceRange {
    /// Price levels of both ends, quantiles taken over `prices`.
    pub fn resolve(&self, prices: Masked<'_, f64>) -> Result<(f64, f64)> {
        let level = |b: Bound| match b {
            Bound::Quantile(q) => quantile(prices, q),
            Bound::Price(p) => Ok(p),
        };
        Ok((level(self.low)?, level(self.high)?))
    }
}

impl TryFrom<String> for PriceRange {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<PriceRange> for String {
    fn from(r: PriceRange) -> Self {
        r.to_string()
    }
}

/// Declarative description of a full study run. Every field has a default,
/// so an empty document plus `input` is a valid configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub columns: ColumnMapping,
    pub interval_mins: u32,
    pub lenient: bool,
    pub market_utc_offset_mins: Option<i32>,
    pub exclude_weekends: bool,
    pub holidays: Vec<NaiveDate>,

    pub acf_max_lag: usize,
    pub hourly_bucket_mins: u32,

    pub regime: ThresholdRule<f64>,
    pub moderate: ArxSpec,
    /// When set, the moderate AR lags are chosen by t-pruning lags
    /// `1..=tprune_max_lag` at this |t| threshold instead of pinned.
    pub tprune_threshold: Option<f64>,
    pub tprune_max_lag: usize,
    pub peak: ArxSpec,
    pub peak_window: TodWindow,
    pub surge_days_only: bool,
    pub joint: bool,
    pub cv_fraction: f64,
    pub seed: u64,

    pub response_max_lag: usize,
    pub forecast_mode: ForecastMode,

    pub spike_windows: Vec<TodWindow>,
    pub spike_ranges: Vec<PriceRange>,
    pub spike_max_delay: usize,

    pub welfare_scenario: Option<PathBuf>,
    pub welfare_policy: Policy,
}

impl Default for RunConfig {
    fn default() -> Self {
        let window = |s: &str| s.parse::<TodWindow>().expect("valid default window");
        let range = |s: &str| s.parse::<PriceRange>().expect("valid default range");
        Self {
            input: None,
            output_dir: PathBuf::from("out"),
            columns: ColumnMapping::default(),
            interval_mins: 15,
            lenient: true,
            market_utc_offset_mins: None,
            exclude_weekends: true,
            holidays: Vec::new(),
            acf_max_lag: 24,
            hourly_bucket_mins: 60,
            regime: ThresholdRule::Quantile(0.95),
            moderate: ArxSpec { ar_lags: vec![1, 3, 5], x_lags: vec![1, 2], transform: InputTransform::Identity },
            tprune_threshold: None,
            tprune_max_lag: 5,
            peak: ArxSpec { ar_lags: vec![1, 2, 4], x_lags: vec![4], transform: InputTransform::Log },
            peak_window: window("14:00-14:30"),
            surge_days_only: true,
            joint: false,
            cv_fraction: 0.5,
            seed: 0,
            response_max_lag: 10,
            forecast_mode: ForecastMode::OneStep,
            spike_windows: vec![window("03:00-09:00"), window("09:00-15:00")],
            spike_ranges: vec![range("q50:q90"), range("q90:q95"), range("q95:q100")],
            spike_max_delay: 24,
            welfare_scenario: None,
            welfare_policy: Policy::RtrpInertia,
        }
    }
}

impl RunConfig {
    /// Reads a `.json` file as JSON and anything else as TOML.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let cfg: Self = if is_json {
            serde_json::from_str(&text).map_err(|e| Error::InvalidSpec(format!("{}: {e}", path.display())))?
        } else {
            toml::from_str(&text).map_err(|e| Error::InvalidSpec(format!("{}: {e}", path.display())))?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.interval_mins == 0 || 1440 % self.interval_mins != 0 {
            return Err(Error::InvalidSpec("interval_mins must divide a day".into()));
        }
        if !(self.cv_fraction > 0.0 && self.cv_fraction < 1.0) {
            return Err(Error::InvalidSpec("cv_fraction must lie in (0, 1)".into()));
        }
        ArxSpec::new(&self.moderate.ar_lags, &self.moderate.x_lags, self.moderate.transform)?;
        ArxSpec::new(&self.peak.ar_lags, &self.peak.x_lags, self.peak.transform)?;
        if self.peak.x_lags.is_empty() {
            return Err(Error::InvalidSpec("peak model needs an exogenous lag to anchor the window".into()));
        }
        Ok(())
    }

    /// Hex SHA-256 of the configuration with the output directory removed,
    /// so the same study written to two places hashes the same.
    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        let text = serde_json::to_string(&c).expect("config serializes");
        hex(&Sha256::digest(text.as_bytes()))
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_study_choices() {
        let c = RunConfig::default();
        assert_eq!(c.interval_mins, 15);
        assert_eq!(c.regime, ThresholdRule::Quantile(0.95));
        assert_eq!(c.moderate.ar_lags, vec![1, 3, 5]);
        assert_eq!(c.moderate.x_lags, vec![1, 2]);
        assert_eq!(c.peak.ar_lags, vec![1, 2, 4]);
        assert_eq!(c.peak.x_lags, vec![4]);
        assert_eq!(c.peak_window.to_string(), "14:00-14:30");
    }

    #[test]
    fn toml_overrides_and_roundtrip() {
        let c: RunConfig = toml::from_str(
            r#"
            input = "data.csv"
            seed = 7
            spike_ranges = ["q90:q100", "144.4187:inf"]
            regime = { explicit = 144.4187 }
            [peak]
            ar_lags = [1, 2]
            x_lags = [4]
            transform = { log_base = 10.0 }
            "#,
        )
        .unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.regime, ThresholdRule::Explicit(144.4187));
        assert_eq!(c.spike_ranges[1].high, Bound::Price(f64::INFINITY));
        assert_eq!(c.peak.transform, InputTransform::LogBase(10.0));
        let back: RunConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
        assert!(toml::from_str::<RunConfig>("bogus = 1").is_err());
    }

    #[test]
    fn fingerprint_ignores_output_dir() {
        let a = RunConfig { output_dir: "x".into(), ..RunConfig::default() };
        let b = RunConfig { output_dir: "y".into(), ..RunConfig::default() };
        assert_eq!(a.fingerprint(), b.fingerprint());
        assert_ne!(a.fingerprint(), RunConfig { seed: 1, ..a.clone() }.fingerprint());
    }

    #[test]
    fn range_parsing() {
        let r: PriceRange = "q90:q100".parse().unwrap();
        assert_eq!(r.low, Bound::Quantile(0.9));
        assert_eq!(r.to_string(), "q90:q100");
        assert!("q90".parse::<PriceRange>().is_err());
        assert!("q120:q130".parse::<PriceRange>().is_err());
    }
}
