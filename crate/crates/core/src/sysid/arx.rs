use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ols::{ols, OlsFit};
use super::tf::TransferFunction;
use crate::error::{Error, Result};
use crate::ingest::{AlignedSeries, TodWindow};
use crate::scalar::Scalar;
use crate::synth::SynthRng;

/// Static input nonlinearity applied to price before the linear dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InputTransform {
    #[default]
    Identity,
    /// Natural logarithm.
    Log,
    /// Logarithm in an arbitrary base.
    LogBase(f64),
}

impl InputTransform {
    /// `None` when a logarithm meets a nonpositive price.
    pub fn apply<T: Scalar>(&self, price: T) -> Option<T> {
        match *self {
            InputTransform::Identity => Some(price),
            InputTransform::Log => (price > T::zero()).then(|| price.ln()),
            InputTransform::LogBase(b) => (price > T::zero()).then(|| price.ln() / T::lit(b).ln()),
        }
    }

    pub fn is_log(&self) -> bool {
        !matches!(self, InputTransform::Identity)
    }
}

/// `Q(t) = c + Σ α_i Q(t-i) + Σ β_j f(P(t-j)) + ε_t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArxModel<T> {
    pub ar_lags: Vec<usize>,
    pub ar_coeffs: Vec<T>,
    pub x_lags: Vec<usize>,
    pub x_coeffs: Vec<T>,
    pub intercept: T,
    pub transform: InputTransform,
    pub noise_std: T,
    pub interval_mins: u32,
    #[serde(default)]
    pub meta: BTreeMap<String, String>,
}

fn check_lags(lags: &[usize], what: &str) -> Result<()> {
    if lags.first() == Some(&0) {
        return Err(Error::InvalidSpec(format!("{what} lags must be positive")));
    }
    if lags.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidSpec(format!("{what} lags must be strictly increasing: {lags:?}")));
    }
    Ok(())
}

impl<T: Scalar> ArxModel<T> {
    pub fn new(
        ar: Vec<(usize, T)>,
        x: Vec<(usize, T)>,
        intercept: T,
        transform: InputTransform,
        noise_std: T,
        interval_mins: u32,
    ) -> Result<Self> {
        let (ar_lags, ar_coeffs) = ar.into_iter().unzip();
        let (x_lags, x_coeffs) = x.into_iter().unzip();
        let model = Self {
            ar_lags,
            ar_coeffs,
            x_lags,
            x_coeffs,
            intercept,
            transform,
            noise_std,
            interval_mins,
            meta: BTreeMap::new(),
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        check_lags(&self.ar_lags, "AR")?;
        check_lags(&self.x_lags, "exogenous")?;
        if self.ar_lags.len() != self.ar_coeffs.len() || self.x_lags.len() != self.x_coeffs.len() {
            return Err(Error::InvalidSpec("lag and coefficient counts differ".into()));
        }
        if !(self.noise_std >= T::zero()) {
            return Err(Error::InvalidSpec(format!("noise std {} must be nonnegative", self.noise_std)));
        }
        if let InputTransform::LogBase(b) = self.transform {
            if !(b > 0.0 && b != 1.0) {
                return Err(Error::InvalidSpec(format!("invalid log base {b}")));
            }
        }
        Ok(())
    }

    pub fn max_lag(&self) -> usize {
        self.ar_lags.iter().chain(&self.x_lags).copied().max().unwrap_or(0)
    }

    pub fn ar_coeff(&self, lag: usize) -> T {
        self.ar_lags.iter().position(|&l| l == lag).map_or(T::zero(), |i| self.ar_coeffs[i])
    }

    pub fn x_coeff(&self, lag: usize) -> T {
        self.x_lags.iter().position(|&l| l == lag).map_or(T::zero(), |i| self.x_coeffs[i])
    }

    /// Noise-free prediction of `loads[t]` from the samples before `t`.
    pub fn predict_at(&self, loads: &[T], prices: &[T], t: usize) -> Result<T> {
        if t < self.max_lag() {
            return Err(Error::InsufficientData(format!(
                "prediction at {t} needs {} samples of history",
                self.max_lag()
            )));
        }
        let mut q = self.intercept;
        for (&lag, &a) in self.ar_lags.iter().zip(&self.ar_coeffs) {
            let v = *loads
                .get(t - lag)
                .ok_or_else(|| Error::InsufficientData(format!("load history ends before {}", t - lag)))?;
            q = q + a * v;
        }
        for (&lag, &b) in self.x_lags.iter().zip(&self.x_coeffs) {
            let p = *prices
                .get(t - lag)
                .ok_or_else(|| Error::InsufficientData(format!("price history ends before {}", t - lag)))?;
            let u = self
                .transform
                .apply(p)
                .ok_or(Error::TransformDomain(p.to_f64_lossy(), t - lag))?;
            q = q + b * u;
        }
        Ok(q)
    }

    /// Steady-state load for a constant price, `(c + Σβ f(p)) / (1 - Σα)`.
    pub fn steady_state(&self, price: T) -> Result<T> {
        let denom = T::one() - self.ar_coeffs.iter().copied().sum::<T>();
        if denom == T::zero() {
            return Err(Error::Domain("AR polynomial has a unit root at z = 1".into()));
        }
        let u = self
            .transform
            .apply(price)
            .ok_or(Error::TransformDomain(price.to_f64_lossy(), 0))?;
        let gain: T = self.x_coeffs.iter().copied().sum();
        Ok((self.intercept + gain * u) / denom)
    }

    pub fn to_transfer_function(&self) -> TransferFunction<T> {
        TransferFunction::from_model(self)
    }

    pub fn to_json(&self) -> Result<String>
    where
        T: Serialize,
    {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(s).map_err(|e| Error::InvalidSpec(e.to_string()))?;
        m.validate()?;
        Ok(m)
    }
}

/// Model structure to identify.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArxSpec {
    pub ar_lags: Vec<usize>,
    pub x_lags: Vec<usize>,
    #[serde(default)]
    pub transform: InputTransform,
}

impl ArxSpec {
    pub fn new(ar_lags: &[usize], x_lags: &[usize], transform: InputTransform) -> Result<Self> {
        check_lags(ar_lags, "AR")?;
        check_lags(x_lags, "exogenous")?;
        Ok(Self { ar_lags: ar_lags.to_vec(), x_lags: x_lags.to_vec(), transform })
    }

    fn max_lag(&self) -> usize {
        self.ar_lags.iter().chain(&self.x_lags).copied().max().unwrap_or(0)
    }
}

/// Complete-case regression rows: every sample a row touches is valid.
struct Rows<T> {
    index: Vec<usize>,
    y: Vec<T>,
    ar: Vec<Vec<T>>,
    x: Vec<Vec<T>>,
}

fn build_rows<T: Scalar>(series: &AlignedSeries<T>, spec: &ArxSpec, candidates: Option<&[usize]>) -> Result<Rows<T>> {
    let max_lag = spec.max_lag();
    let mut targets: Vec<usize> = match candidates {
        Some(c) => c.to_vec(),
        None => (0..series.len()).collect(),
    };
    targets.sort_unstable();
    targets.dedup();
    let mut rows = Rows {
        index: Vec::new(),
        y: Vec::new(),
        ar: vec![Vec::new(); spec.ar_lags.len()],
        x: vec![Vec::new(); spec.x_lags.len()],
    };
    for t in targets {
        if t < max_lag || t >= series.len() || !series.is_valid(t) {
            continue;
        }
        let lags_ok = spec.ar_lags.iter().chain(&spec.x_lags).all(|&l| series.is_valid(t - l));
        if !lags_ok {
            continue;
        }
        rows.index.push(t);
        rows.y.push(series.loads[t]);
        for (col, &l) in rows.ar.iter_mut().zip(&spec.ar_lags) {
            col.push(series.loads[t - l]);
        }
        for (col, &l) in rows.x.iter_mut().zip(&spec.x_lags) {
            let p = series.prices[t - l];
            col.push(spec.transform.apply(p).ok_or(Error::TransformDomain(p.to_f64_lossy(), t - l))?);
        }
    }
    Ok(rows)
}

fn intercept_and<T: Scalar>(n: usize, cols: &[Vec<T>]) -> Vec<Vec<T>> {
    std::iter::once(vec![T::one(); n]).chain(cols.iter().cloned()).collect()
}

fn names(prefix: &str, lags: &[usize]) -> Vec<String> {
    std::iter::once(format!("{prefix}0"))
        .chain(lags.iter().map(|l| format!("{prefix}{l}")))
        .collect()
}

/// Autoregressive fit of the load with an intercept.
#[derive(Debug, Clone, PartialEq)]
pub struct ArFit<T> {
    pub fit: OlsFit<T>,
    pub model: ArxModel<T>,
    /// Target index of each regression row.
    pub rows: Vec<usize>,
    /// `Q_res(t)` per row, aligned with `rows`.
    pub residuals: Vec<T>,
}

fn ar_step<T: Scalar>(rows: &Rows<T>, ar_lags: &[usize]) -> Result<OlsFit<T>> {
    ols(&intercept_and(rows.y.len(), &rows.ar), &rows.y, &names("alpha", ar_lags))
}

/// Fits `Q(t) = α0 + Σ α_i Q(t-i) + Q_res(t)`. Needs at least ten rows per
/// coefficient.
pub fn fit_ar<T: Scalar>(
    series: &AlignedSeries<T>,
    lags: &[usize],
    candidates: Option<&[usize]>,
) -> Result<ArFit<T>> {
    let spec = ArxSpec::new(lags, &[], InputTransform::Identity)?;
    let rows = build_rows(series, &spec, candidates)?;
    let needed = 10 * (lags.len() + 1);
    if rows.y.len() < needed {
        return Err(Error::InsufficientData(format!(
            "AR fit needs {needed} complete rows, have {}",
            rows.y.len()
        )));
    }
    let fit = ar_step(&rows, lags)?;
    let model = ArxModel {
        ar_lags: lags.to_vec(),
        ar_coeffs: fit.estimates[1..].to_vec(),
        x_lags: Vec::new(),
        x_coeffs: Vec::new(),
        intercept: fit.estimates[0],
        transform: InputTransform::Identity,
        noise_std: fit.rmse,
        interval_mins: series.interval_mins,
        meta: BTreeMap::new(),
    };
    Ok(ArFit { residuals: fit.residuals.clone(), fit, model, rows: rows.index })
}

/// Result of the two-step procedure: AR fit of the load, then regression of
/// the AR residual on lagged (transformed) prices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoStepFit<T> {
    pub step1: OlsFit<T>,
    /// `None` when no exogenous lags were requested.
    pub step2: Option<OlsFit<T>>,
    pub model: ArxModel<T>,
    /// `1 - SSE / SST(Q)` of the assembled model over the same rows.
    pub combined_r2: T,
    pub combined_rmse: T,
    #[serde(skip)]
    pub rows: Vec<usize>,
}

impl<T: Scalar> TwoStepFit<T> {
    /// Share of the original load variance explained by the price step.
    pub fn incremental_r2(&self) -> T {
        self.combined_r2 - self.step1.r2
    }
}

pub fn two_step_arx<T: Scalar>(
    series: &AlignedSeries<T>,
    spec: &ArxSpec,
    candidates: Option<&[usize]>,
) -> Result<TwoStepFit<T>> {
    let rows = build_rows(series, spec, candidates)?;
    let n = rows.y.len();
    let step1 = ar_step(&rows, &spec.ar_lags)?;
    let (step2, intercept, x_coeffs, residuals) = if spec.x_lags.is_empty() {
        (None, step1.estimates[0], Vec::new(), step1.residuals.clone())
    } else {
        let step2 = ols(&intercept_and(n, &rows.x), &step1.residuals, &names("beta", &spec.x_lags))?;
        let intercept = step1.estimates[0] + step2.estimates[0];
        let x_coeffs = step2.estimates[1..].to_vec();
        let residuals = step2.residuals.clone();
        (Some(step2), intercept, x_coeffs, residuals)
    };
    let sse: T = residuals.iter().map(|&r| r * r).sum();
    let nf = T::from_usize_lossy(n);
    let mean = rows.y.iter().copied().sum::<T>() / nf;
    let sst: T = rows.y.iter().map(|&v| (v - mean) * (v - mean)).sum();
    let n_params = 1 + spec.ar_lags.len() + spec.x_lags.len();
    let combined_r2 = if sst > T::zero() { T::one() - sse / sst } else { T::one() };
    let combined_rmse = (sse / T::from_usize_lossy(n.saturating_sub(n_params).max(1))).sqrt();
    let model = ArxModel {
        ar_lags: spec.ar_lags.clone(),
        ar_coeffs: step1.estimates[1..].to_vec(),
        x_lags: spec.x_lags.clone(),
        x_coeffs,
        intercept,
        transform: spec.transform,
        noise_std: combined_rmse,
        interval_mins: series.interval_mins,
        meta: BTreeMap::from([("estimator".to_string(), "two-step".to_string())]),
    };
    Ok(TwoStepFit { step1, step2, model, combined_r2, combined_rmse, rows: rows.index })
}

/// Single least-squares fit on all regressors at once, for comparison with
/// the two-step estimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointFit<T> {
    pub fit: OlsFit<T>,
    pub model: ArxModel<T>,
}

pub fn joint_arx<T: Scalar>(
    series: &AlignedSeries<T>,
    spec: &ArxSpec,
    candidates: Option<&[usize]>,
) -> Result<JointFit<T>> {
    let rows = build_rows(series, spec, candidates)?;
    let mut cols = intercept_and(rows.y.len(), &rows.ar);
    cols.extend(rows.x.iter().cloned());
    let mut labels = names("alpha", &spec.ar_lags);
    labels.extend(spec.x_lags.iter().map(|l| format!("beta{l}")));
    let fit = ols(&cols, &rows.y, &labels)?;
    let na = spec.ar_lags.len();
    let model = ArxModel {
        ar_lags: spec.ar_lags.clone(),
        ar_coeffs: fit.estimates[1..=na].to_vec(),
        x_lags: spec.x_lags.clone(),
        x_coeffs: fit.estimates[na + 1..].to_vec(),
        intercept: fit.estimates[0],
        transform: spec.transform,
        noise_std: fit.rmse,
        interval_mins: series.interval_mins,
        meta: BTreeMap::from([("estimator".to_string(), "joint".to_string())]),
    };
    Ok(JointFit { fit, model })
}

/// Rows whose lagged prices all sit at or below `threshold`.
pub fn moderate_rows<T: Scalar>(series: &AlignedSeries<T>, threshold: T, x_lags: &[usize]) -> Vec<usize> {
    let max_lag = x_lags.iter().copied().max().unwrap_or(0);
    (max_lag..series.len())
        .filter(|&t| {
            x_lags
                .iter()
                .all(|&l| series.is_valid(t - l) && series.prices[t - l] <= threshold)
        })
        .collect()
}

/// Rows `t` anchored at `s = t - anchor_lag`, where `s` falls in the clock
/// window and (with `surge_only`) `P(s) > threshold`.
pub fn peak_rows<T: Scalar>(
    series: &AlignedSeries<T>,
    threshold: T,
    window: TodWindow,
    anchor_lag: usize,
    surge_only: bool,
) -> Vec<usize> {
    (anchor_lag..series.len())
        .filter(|&t| {
            let s = t - anchor_lag;
            series.is_valid(s)
                && window.contains_minute(series.minute_of_day(s))
                && (!surge_only || series.prices[s] > threshold)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LagCriterion {
    /// Backward elimination until every AR coefficient has `|t| >= threshold`.
    TPrune { threshold: f64 },
    /// Use the listed lags verbatim.
    Pinned(Vec<usize>),
}

impl Default for LagCriterion {
    fn default() -> Self {
        LagCriterion::TPrune { threshold: 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagSelection {
    pub lags: Vec<usize>,
    pub dropped: Vec<usize>,
    pub diagnostic: Option<String>,
}

pub fn select_lags<T: Scalar>(
    series: &AlignedSeries<T>,
    max_lag: usize,
    criterion: &LagCriterion,
    candidates: Option<&[usize]>,
) -> Result<LagSelection> {
    if max_lag == 0 {
        return Err(Error::Domain("max_lag must be at least 1".into()));
    }
    let threshold = match criterion {
        LagCriterion::Pinned(lags) => {
            check_lags(lags, "AR")?;
            return Ok(LagSelection { lags: lags.clone(), dropped: Vec::new(), diagnostic: None });
        }
        LagCriterion::TPrune { threshold } => T::lit(*threshold),
    };
    let all: Vec<usize> = (1..=max_lag).collect();
    let full = build_rows(series, &ArxSpec::new(&all, &[], InputTransform::Identity)?, candidates)?;
    let mut lags = all;
    let mut dropped = Vec::new();
    while !lags.is_empty() {
        let cols: Vec<Vec<T>> = lags.iter().map(|&l| full.ar[l - 1].clone()).collect();
        let rows = Rows { index: Vec::new(), y: full.y.clone(), ar: cols, x: Vec::new() };
        let drop = match ar_step(&rows, &lags) {
            Ok(fit) => {
                let (i, t) = fit.t_stats[1..]
                    .iter()
                    .enumerate()
                    .map(|(i, t)| (i, t.abs()))
                    .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal))
                    .expect("nonempty lags");
                if t >= threshold {
                    break;
                }
                i
            }
            Err(Error::SingularDesign { column, .. }) => {
                match lags.iter().position(|l| format!("alpha{l}") == column) {
                    Some(i) => i,
                    None => return Err(Error::Degenerate("load series is constant".into())),
                }
            }
            Err(e) => return Err(e),
        };
        dropped.push(lags.remove(drop));
    }
    let diagnostic = lags
        .is_empty()
        .then(|| format!("every lag up to {max_lag} fell below |t| = {threshold}"));
    Ok(LagSelection { lags, dropped, diagnostic })
}

/// Held-out evaluation of a two-step fit on a random half of the rows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvResult<T> {
    pub train: TwoStepFit<T>,
    pub train_r2: T,
    pub test_r2: T,
    pub test_rmse: T,
    pub n_train: usize,
    pub n_test: usize,
    #[serde(skip)]
    pub test_rows: Vec<usize>,
}

/// Splits complete regression rows at random (`train_fraction` go to the
/// training set), fits on the training rows and scores the rest.
pub fn cross_validate<T: Scalar>(
    series: &AlignedSeries<T>,
    spec: &ArxSpec,
    train_fraction: f64,
    seed: u64,
    candidates: Option<&[usize]>,
) -> Result<CvResult<T>> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Domain(format!("train fraction {train_fraction} outside (0, 1)")));
    }
    let mut rows = build_rows(series, spec, candidates)?.index;
    SynthRng::new(seed).shuffle(&mut rows);
    let n_train = (rows.len() as f64 * train_fraction).floor() as usize;
    let mut test_rows = rows.split_off(n_train);
    let mut train_rows = rows;
    train_rows.sort_unstable();
    test_rows.sort_unstable();
    if test_rows.len() < 2 {
        return Err(Error::InsufficientData("test set needs at least two rows".into()));
    }
    let train = two_step_arx(series, spec, Some(&train_rows))?;
    let predicted = test_rows
        .iter()
        .map(|&t| train.model.predict_at(&series.loads, &series.prices, t))
        .collect::<Result<Vec<T>>>()?;
    let actual: Vec<T> = test_rows.iter().map(|&t| series.loads[t]).collect();
    let n = T::from_usize_lossy(actual.len());
    let mean = actual.iter().copied().sum::<T>() / n;
    let sse: T = actual.iter().zip(&predicted).map(|(&a, &p)| (a - p) * (a - p)).sum();
    let sst: T = actual.iter().map(|&a| (a - mean) * (a - mean)).sum();
    Ok(CvResult {
        train_r2: train.combined_r2,
        test_r2: if sst > T::zero() { T::one() - sse / sst } else { T::one() },
        test_rmse: (sse / n).sqrt(),
        n_train: train.rows.len(),
        n_test: test_rows.len(),
        train,
        test_rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::parse_timestamp;

    fn series(prices: Vec<f64>, loads: Vec<f64>) -> AlignedSeries<f64> {
        AlignedSeries::from_values(parse_timestamp("2008-01-07T00:00", None).unwrap(), 15, prices, loads).unwrap()
    }

    #[test]
    fn exact_ar1_recovered() {
        let mut q = vec![1000.0];
        for t in 1..200 {
            q.push(0.9 * q[t - 1] + 10.0);
        }
        let s = series(vec![1.0; 200], q);
        let fit = fit_ar(&s, &[1], None).unwrap();
        assert!((fit.model.ar_coeffs[0] - 0.9).abs() < 1e-9);
        assert!((fit.model.intercept - 10.0).abs() < 1e-6);
        assert_eq!(fit.rows.len(), 199);
    }

    #[test]
    fn tprune_on_exact_ar1_keeps_lag_one() {
        let mut q = vec![2f64.powi(40)];
        for t in 1..120 {
            q.push(0.5 * q[t - 1]);
        }
        let s = series(vec![1.0; 120], q);
        let sel = select_lags(&s, 5, &LagCriterion::default(), None).unwrap();
        assert_eq!(sel.lags, vec![1]);

        let mut q = vec![1000.0];
        for t in 1..300 {
            q.push(0.97 * q[t - 1] + 10.0);
        }
        let s = series(vec![1.0; 300], q);
        assert_eq!(select_lags(&s, 5, &LagCriterion::default(), None).unwrap().lags, vec![1]);
    }

    #[test]
    fn pinned_is_verbatim() {
        let s = series(vec![1.0; 10], vec![1.0; 10]);
        let sel = select_lags(&s, 5, &LagCriterion::Pinned(vec![1, 3, 5]), None).unwrap();
        assert_eq!(sel.lags, vec![1, 3, 5]);
        assert!(select_lags(&s, 5, &LagCriterion::Pinned(vec![3, 1]), None).is_err());
    }

    #[test]
    fn masked_samples_drop_rows() {
        let n = 100;
        let q: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin() * 10.0 + 100.0).collect();
        let s = series(vec![1.0; n], q).masked_where(|i| i != 50);
        let fit = fit_ar(&s, &[1, 2], None).unwrap();
        // rows 50, 51, 52 touch the masked sample; rows 0 and 1 lack history
        assert_eq!(fit.rows.len(), n - 2 - 3);
        assert!(!fit.rows.contains(&51));
    }

    #[test]
    fn log_transform_rejects_nonpositive_prices() {
        let n = 60;
        let q: Vec<f64> = (0..n).map(|i| (i as f64).cos() + 5.0).collect();
        let mut p: Vec<f64> = (0..n).map(|i| 10.0 + (i % 5) as f64).collect();
        p[30] = -1.0;
        let s = series(p, q);
        let spec = ArxSpec::new(&[1], &[1], InputTransform::Log).unwrap();
        assert!(matches!(two_step_arx(&s, &spec, None), Err(Error::TransformDomain(_, 30))));
        let away: Vec<usize> = (40..n).collect();
        assert!(two_step_arx(&s, &spec, Some(&away)).is_ok());
    }

    #[test]
    fn model_json_roundtrip() {
        let m = ArxModel::new(vec![(1, 0.5)], vec![(4, -220.1)], 1961.66, InputTransform::Log, 281.0, 15).unwrap();
        let back = ArxModel::<f64>::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
        let v: serde_json::Value = serde_json::from_str(&m.to_json().unwrap()).unwrap();
        assert_eq!(v["transform"], "log");
        for key in ["ar_lags", "ar_coeffs", "x_lags", "x_coeffs", "intercept", "noise_std", "interval_mins", "meta"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        let base10 = ArxModel::<f64>::from_json(&m.to_json().unwrap().replace("\"log\"", "{\"log_base\": 10.0}")).unwrap();
        assert_eq!(base10.transform, InputTransform::LogBase(10.0));
    }

    #[test]
    fn invalid_models_rejected() {
        assert!(ArxModel::new(vec![(2, 0.1), (1, 0.1)], vec![], 0.0, InputTransform::Identity, 1.0, 15).is_err());
        assert!(ArxModel::new(vec![(0, 0.1)], vec![], 0.0, InputTransform::Identity, 1.0, 15).is_err());
        assert!(ArxModel::new(vec![], vec![], 0.0, InputTransform::LogBase(1.0), 1.0, 15).is_err());
    }

    #[test]
    fn window_anchored_rows() {
        let n = 96 * 2;
        let mut p = vec![50.0; n];
        p[56] = 500.0; // 14:00 on day one
        let s = series(p, vec![1.0; n]);
        let w: TodWindow = "14:00-14:30".parse().unwrap();
        assert_eq!(peak_rows(&s, 144.4187, w, 4, true), vec![60]);
        assert_eq!(peak_rows(&s, 144.4187, w, 4, false), vec![60, 61, 156, 157]);
        let m = moderate_rows(&s, 144.4187, &[1, 2]);
        assert!(!m.contains(&57) && !m.contains(&58) && m.contains(&59));
    }
}
