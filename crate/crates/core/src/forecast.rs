//! Prediction, simulation and residual diagnostics for [`ArxModel`]s.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::AlignedSeries;
use crate::scalar::Scalar;
use crate::stats::{moments, normal_probability_plot, pearson};
use crate::synth::SynthRng;
use crate::sysid::{stability, ArxModel};

/// Noise-free one-step prediction of `loads[t]` from realized history.
pub fn predict_one_step<T: Scalar>(model: &ArxModel<T>, loads: &[T], prices: &[T], t: usize) -> Result<T> {
    model.predict_at(loads, prices, t)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastResult<T> {
    /// First forecast index (open loop) or `None` for one-step runs.
    pub origin: Option<usize>,
    pub horizon: usize,
    pub targets: Vec<usize>,
    pub forecasts: Vec<T>,
    /// Forecast-error std per entry of `forecasts`.
    pub innovation_std: Vec<T>,
    pub realized: Option<Vec<T>>,
    pub residuals: Option<Vec<T>>,
    /// Set when the model's characteristic roots are not all inside the unit circle.
    pub unstable: bool,
}

fn is_unstable<T: Scalar>(model: &ArxModel<T>) -> bool {
    if model.ar_lags.is_empty() {
        return false;
    }
    stability(&model.to_transfer_function()).map_or(true, |s| !s.stable)
}

/// `σ·sqrt(Σ_{j<h} ψ_j²)` for `h = 1..=horizon`, where `ψ` is the impulse
/// response of `1 / A(z⁻¹)`.
pub fn innovation_std<T: Scalar>(model: &ArxModel<T>, horizon: usize) -> Vec<T> {
    let mut psi = vec![T::one()];
    for j in 1..horizon {
        let v = model
            .ar_lags
            .iter()
            .zip(&model.ar_coeffs)
            .filter(|(&l, _)| l <= j)
            .map(|(&l, &a)| a * psi[j - l])
            .sum();
        psi.push(v);
    }
    let mut acc = T::zero();
    psi.iter()
        .map(|&p| {
            acc = acc + p * p;
            model.noise_std * acc.sqrt()
        })
        .collect()
}

/// Iterates one-step predictions `k` times past the end of `history`,
/// feeding forecasts back into the AR terms. `prices` must cover the
/// exogenous lags of every forecast step.
pub fn forecast_k<T: Scalar>(model: &ArxModel<T>, history: &[T], prices: &[T], k: usize) -> Result<ForecastResult<T>> {
    if k == 0 {
        return Err(Error::Domain("forecast horizon must be at least 1".into()));
    }
    let origin = history.len();
    let mut loads = history.to_vec();
    for t in origin..origin + k {
        let q = model.predict_at(&loads, prices, t)?;
        loads.push(q);
    }
    Ok(ForecastResult {
        origin: Some(origin),
        horizon: k,
        targets: (origin..origin + k).collect(),
        forecasts: loads.split_off(origin),
        innovation_std: innovation_std(model, k),
        realized: None,
        residuals: None,
        unstable: is_unstable(model),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForecastMode {
    /// Every target predicted from realized loads up to `t - 1`.
    OneStep,
    /// Every target predicted `horizon` steps ahead, from realized loads up
    /// to `t - horizon` and realized prices throughout.
    OpenLoop { horizon: usize },
}

/// Forecasts each target index of `series` and attaches realized values.
/// Targets whose lag window touches a masked sample are skipped.
pub fn forecast_targets<T: Scalar>(
    model: &ArxModel<T>,
    series: &AlignedSeries<T>,
    targets: &[usize],
    mode: ForecastMode,
) -> Result<ForecastResult<T>> {
    let h = match mode {
        ForecastMode::OneStep => 1,
        ForecastMode::OpenLoop { horizon } if horizon >= 1 => horizon,
        ForecastMode::OpenLoop { .. } => return Err(Error::Domain("forecast horizon must be at least 1".into())),
    };
    let reach = model.max_lag() + h - 1;
    let mut used = Vec::new();
    let mut forecasts = Vec::new();
    for &t in targets {
        if t < reach || t >= series.len() || !(t - reach..=t).all(|i| series.is_valid(i)) {
            continue;
        }
        let q = if h == 1 {
            model.predict_at(&series.loads, &series.prices, t)?
        } else {
            let origin = t + 1 - h;
            let r = forecast_k(model, &series.loads[..origin], &series.prices, h)?;
            r.forecasts[h - 1]
        };
        used.push(t);
        forecasts.push(q);
    }
    if used.is_empty() {
        return Err(Error::InsufficientData("no target has a complete history window".into()));
    }
    let realized: Vec<T> = used.iter().map(|&t| series.loads[t]).collect();
    let residuals = realized.iter().zip(&forecasts).map(|(&a, &f)| a - f).collect();
    let sd = innovation_std(model, h)[h - 1];
    Ok(ForecastResult {
        origin: None,
        horizon: h,
        innovation_std: vec![sd; used.len()],
        targets: used,
        forecasts,
        realized: Some(realized),
        residuals: Some(residuals),
        unstable: is_unstable(model),
    })
}

/// Runs the model forward for `n` samples from `initial`, adding Gaussian
/// noise of std `noise_std` at every generated step.
pub fn simulate<T: Scalar>(
    model: &ArxModel<T>,
    initial: &[T],
    prices: &[T],
    noise_std: T,
    seed: u64,
    n: usize,
) -> Result<Vec<T>> {
    if initial.len() < model.max_lag() {
        return Err(Error::InsufficientData(format!(
            "simulation needs {} initial samples, got {}",
            model.max_lag(),
            initial.len()
        )));
    }
    if prices.len() < n {
        return Err(Error::InsufficientData(format!("price path has {} samples, need {n}", prices.len())));
    }
    let mut rng = SynthRng::new(seed);
    let mut q: Vec<T> = initial.iter().copied().take(n).collect();
    q.reserve(n.saturating_sub(q.len()));
    while q.len() < n {
        let t = q.len();
        let mean = model.predict_at(&q, prices, t)?;
        q.push(mean + noise_std * T::lit(rng.normal()));
    }
    Ok(q)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualDiagnostics<T> {
    pub n: usize,
    pub mean: T,
    pub std: T,
    pub skewness: T,
    pub kurtosis: T,
    /// Pearson correlation between forecasts and realized values.
    pub correlation: T,
    pub probability_plot: Vec<(T, T)>,
}

pub fn residual_diagnostics<T: Scalar>(result: &ForecastResult<T>) -> Result<ResidualDiagnostics<T>> {
    let (Some(realized), Some(residuals)) = (&result.realized, &result.residuals) else {
        return Err(Error::InsufficientData("forecast has no realized values".into()));
    };
    let m = moments(residuals)?;
    let pairs: Vec<(T, T)> = result.forecasts.iter().copied().zip(realized.iter().copied()).collect();
    Ok(ResidualDiagnostics {
        n: m.n,
        mean: m.mean,
        std: m.std,
        skewness: m.skewness,
        kurtosis: m.kurtosis,
        correlation: pearson(&pairs)?,
        probability_plot: normal_probability_plot(residuals)?,
    })
}
