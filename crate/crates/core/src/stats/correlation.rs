use serde::{Deserialize, Serialize};

use super::Masked;
use crate::error::{Error, Result};
use crate::ingest::AlignedSeries;
use crate::scalar::Scalar;

/// 97.5% standard normal quantile used for the white-noise band.
const Z_975: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcfResult<T> {
    pub lags: Vec<usize>,
    pub values: Vec<T>,
    /// Half-width of the 95% band under a white-noise null, `z / sqrt(N)`.
    pub confidence_band: T,
}

fn check_lag_budget(n: usize, max_lag: usize) -> Result<()> {
    if max_lag == 0 {
        return Err(Error::Domain("max_lag must be positive".into()));
    }
    if 2 * max_lag >= n {
        return Err(Error::InsufficientData(format!(
            "max_lag {max_lag} needs more than {} valid samples, have {n}",
            2 * max_lag
        )));
    }
    Ok(())
}

/// Sample autocorrelation `r_k = Σ (x_t - x̄)(x_{t+k} - x̄) / Σ (x_t - x̄)²`,
/// summing only over pairs where both samples are valid.
pub fn acf<'a, T: Scalar>(x: impl Into<Masked<'a, T>>, max_lag: usize) -> Result<AcfResult<T>> {
    let x = x.into();
    let n = x.valid_count();
    check_lag_budget(n, max_lag)?;
    let nf = T::from_usize_lossy(n);
    let mean = x.values().sum::<T>() / nf;
    let denom: T = x.values().map(|v| (v - mean) * (v - mean)).sum();
    let scale = x.values().fold(T::zero(), |m, v| m.max(v.abs()));
    if !(denom.sqrt() > T::lit(8.0) * T::epsilon() * scale * nf.sqrt()) {
        return Err(Error::Degenerate("autocorrelation of a constant series".into()));
    }
    let mut values = Vec::with_capacity(max_lag + 1);
    values.push(T::one());
    for k in 1..=max_lag {
        let mut s = T::zero();
        for t in 0..x.len().saturating_sub(k) {
            if let (Some(a), Some(b)) = (x.get(t), x.get(t + k)) {
                s = s + (a - mean) * (b - mean);
            }
        }
        values.push(s / denom);
    }
    Ok(AcfResult {
        lags: (0..=max_lag).collect(),
        values,
        confidence_band: T::lit(Z_975) / nf.sqrt(),
    })
}

/// Partial autocorrelation from the Durbin–Levinson recursion on the sample
/// ACF. Lag 0 is reported as 1.
pub fn pacf<'a, T: Scalar>(x: impl Into<Masked<'a, T>>, max_lag: usize) -> Result<AcfResult<T>> {
    let r = acf(x, max_lag)?;
    let rho = &r.values;
    let tol = T::lit(1e3) * T::epsilon();
    let mut values = vec![T::one()];
    let mut phi: Vec<T> = Vec::with_capacity(max_lag);
    let mut err = T::one();
    for k in 1..=max_lag {
        let num = rho[k] - (1..k).map(|j| phi[j - 1] * rho[k - j]).sum::<T>();
        if !(err > tol) {
            return Err(Error::Conditioning(format!(
                "Toeplitz system singular at lag {k} (innovation variance {err})"
            )));
        }
        let mut kk = num / err;
        if kk.abs() > T::one() + tol {
            return Err(Error::Conditioning(format!(
                "sample autocovariance not positive definite at lag {k}"
            )));
        }
        kk = kk.max(-T::one()).min(T::one());
        let prev = phi.clone();
        for j in 1..k {
            phi[j - 1] = prev[j - 1] - kk * prev[k - j - 1];
        }
        phi.push(kk);
        err = err * (T::one() - kk * kk);
        values.push(kk);
    }
    Ok(AcfResult { lags: r.lags, values, confidence_band: r.confidence_band })
}

/// Pearson correlation of paired samples.
pub fn pearson<T: Scalar>(pairs: &[(T, T)]) -> Result<T> {
    let n = pairs.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!("correlation needs 2 pairs, got {n}")));
    }
    let nf = T::from_usize_lossy(n);
    let mx = pairs.iter().map(|p| p.0).sum::<T>() / nf;
    let my = pairs.iter().map(|p| p.1).sum::<T>() / nf;
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for &(a, b) in pairs {
        sxy = sxy + (a - mx) * (b - my);
        sxx = sxx + (a - mx) * (a - mx);
        syy = syy + (b - my) * (b - my);
    }
    if sxx == T::zero() || syy == T::zero() {
        return Err(Error::Degenerate("correlation with a constant variable".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).max(-T::one()).min(T::one()))
}

/// Correlation between `x(t)` and `y(t + k)` over the trigger times `t`.
pub fn lagged_correlation<'a, 'b, T: Scalar>(
    events: &[usize],
    x: impl Into<Masked<'a, T>>,
    y: impl Into<Masked<'b, T>>,
    k: usize,
) -> Result<T> {
    let (x, y) = (x.into(), y.into());
    let pairs: Vec<(T, T)> = events
        .iter()
        .filter_map(|&t| Some((x.get(t)?, y.get(t + k)?)))
        .collect();
    if pairs.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "lagged correlation at k={k} has {} usable events, need 3",
            pairs.len()
        )));
    }
    pearson(&pairs)
}

/// Mean load change `(1/|S|) Σ_{t∈S} [Q(t+k) - Q(t)]` where
/// `S = {t : p_min <= P(t) <= p_max}` restricted to valid `t` and `t + k`.
pub fn avg_change_after_surge<T: Scalar>(series: &AlignedSeries<T>, p_min: T, p_max: T, k: usize) -> Result<T> {
    if p_min > p_max {
        return Err(Error::Domain(format!("empty price band [{p_min}, {p_max}]")));
    }
    let mut sum = T::zero();
    let mut count = 0usize;
    for t in 0..series.len().saturating_sub(k) {
        let p = series.prices[t];
        if series.is_valid(t) && series.is_valid(t + k) && p >= p_min && p <= p_max {
            sum = sum + (series.loads[t + k] - series.loads[t]);
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::InsufficientData(format!(
            "no samples with price in [{p_min}, {p_max}] and a valid sample {k} steps later"
        )));
    }
    Ok(sum / T::from_usize_lossy(count))
}

/// Indices of valid samples priced strictly above `threshold`. With
/// `onset_only`, only the first sample of each run above the threshold.
pub fn surge_events<T: Scalar>(series: &AlignedSeries<T>, threshold: T, onset_only: bool) -> Vec<usize> {
    let above = |i: usize| series.is_valid(i) && series.prices[i] > threshold;
    (0..series.len())
        .filter(|&i| above(i) && !(onset_only && i > 0 && above(i - 1)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::SynthRng;

    fn ar1(phi: f64, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = SynthRng::new(seed);
        let mut x = vec![0.0; n];
        for t in 1..n {
            x[t] = phi * x[t - 1] + rng.normal();
        }
        x
    }

    #[test]
    fn lag_zero_is_one() {
        let x = ar1(0.3, 200, 1);
        let r = acf(&x, 10).unwrap();
        assert_eq!(r.values[0], 1.0);
        assert!(r.values.iter().all(|v| v.abs() <= 1.0));
    }

    #[test]
    fn white_noise_within_band() {
        let x = ar1(0.0, 4000, 2);
        let r = acf(&x, 40).unwrap();
        let inside = r.values[1..].iter().filter(|v| v.abs() <= r.confidence_band).count();
        assert!(inside >= 36, "only {inside}/40 lags inside band");
        let p = pacf(&x, 40).unwrap();
        let inside = p.values[1..].iter().filter(|v| v.abs() <= p.confidence_band).count();
        assert!(inside >= 36, "only {inside}/40 pacf lags inside band");
    }

    #[test]
    fn ar1_acf_and_pacf() {
        let phi = 0.7;
        let x = ar1(phi, 50_000, 3);
        let r = acf(&x, 5).unwrap();
        for k in 1..=5 {
            assert!((r.values[k] - phi.powi(k as i32)).abs() < 0.02, "k={k}: {}", r.values[k]);
        }
        let p = pacf(&x, 5).unwrap();
        assert!((p.values[1] - phi).abs() < 0.02);
        for k in 2..=5 {
            assert!(p.values[k].abs() < 0.02, "k={k}: {}", p.values[k]);
        }
    }

    #[test]
    fn pacf_lag_one_equals_acf_lag_one() {
        let x = ar1(-0.4, 500, 4);
        assert_eq!(acf(&x, 3).unwrap().values[1], pacf(&x, 3).unwrap().values[1]);
    }

    #[test]
    fn acf_errors() {
        assert!(matches!(acf(&vec![1.0; 100], 5), Err(Error::Degenerate(_))));
        assert!(matches!(acf(&vec![1.0, 2.0, 3.0, 4.0], 2), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn perfectly_anticorrelated() {
        let x: Vec<f64> = (0..20).map(|i| (i as f64).sin()).collect();
        let mut y = vec![0.0; 23];
        for i in 0..20 {
            y[i + 3] = -x[i];
        }
        let events: Vec<usize> = (0..20).collect();
        let r = lagged_correlation(&events, &x, &y, 3).unwrap();
        assert!((r + 1.0).abs() < 1e-12);
        assert!(lagged_correlation(&[0, 1], &x, &y, 3).is_err());
    }

    #[test]
    fn independent_series_near_zero() {
        let x = ar1(0.0, 5000, 5);
        let y = ar1(0.0, 5000, 6);
        let events: Vec<usize> = (0..4990).collect();
        assert!(lagged_correlation(&events, &x, &y, 2).unwrap().abs() < 0.05);
    }
}
