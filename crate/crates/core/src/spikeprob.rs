//! Empirical probabilities of price-spike recurrence after a delay.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{AlignedSeries, TodWindow};
use crate::scalar::Scalar;
use crate::stats::normal_quantile;

/// `true` where the sample is valid and `P(t) > threshold`.
pub fn spike_indicator<T: Scalar>(series: &AlignedSeries<T>, threshold: T) -> Vec<bool> {
    (0..series.len())
        .map(|i| series.is_valid(i) && series.prices[i] > threshold)
        .collect()
}

/// Conditioning event: time of day and price band `[low, high]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpikeCondition<T> {
    pub window: TodWindow,
    pub low: T,
    pub high: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpikeProbProfile<T> {
    pub condition: SpikeCondition<T>,
    pub threshold: T,
    pub lags: Vec<usize>,
    /// Conditioning samples followed by a spike `k` steps later.
    pub hits: Vec<usize>,
    /// Conditioning samples with a valid sample `k` steps later.
    pub counts: Vec<usize>,
    /// `hits / counts`, `None` when the count is zero.
    pub probability: Vec<Option<T>>,
    /// Spike frequency among valid samples inside the window.
    pub baseline: T,
    pub baseline_count: usize,
}

impl<T: Scalar> SpikeProbProfile<T> {
    /// Largest `|conditional - baseline|` over lags with data.
    pub fn max_abs_deviation(&self) -> Option<T> {
        self.probability
            .iter()
            .flatten()
            .map(|&p| (p - self.baseline).abs())
            .reduce(T::max)
    }

    /// Binomial standard deviation of the conditional estimate at lag index
    /// `i` under the baseline rate.
    pub fn binomial_sd(&self, i: usize) -> Option<T> {
        binomial_sd(self.baseline, self.counts[i])
    }
}

/// `sqrt(p(1-p)/n)`.
pub fn binomial_sd<T: Scalar>(p: T, n: usize) -> Option<T> {
    (n > 0).then(|| (p * (T::one() - p) / T::from_usize_lossy(n)).sqrt())
}

/// Normal-approximation two-sided band half-width at level `1 - alpha`,
/// Bonferroni-split across `tests` simultaneous comparisons.
pub fn binomial_band<T: Scalar>(p: T, n: usize, alpha: T, tests: usize) -> Result<Option<T>> {
    if !(alpha > T::zero() && alpha < T::one()) || tests == 0 {
        return Err(Error::Domain("band needs alpha in (0, 1) and at least one test".into()));
    }
    let z = normal_quantile(T::one() - alpha / (T::lit(2.0) * T::from_usize_lossy(tests)))?;
    Ok(binomial_sd(p, n).map(|sd| z * sd))
}

pub fn conditional_spike_prob<T: Scalar>(
    series: &AlignedSeries<T>,
    condition: SpikeCondition<T>,
    delays: &[usize],
    threshold: T,
) -> Result<SpikeProbProfile<T>> {
    if condition.low > condition.high {
        return Err(Error::Domain(format!("empty price range [{}, {}]", condition.low, condition.high)));
    }
    let spike = spike_indicator(series, threshold);
    let in_window: Vec<usize> = (0..series.len())
        .filter(|&t| series.is_valid(t) && condition.window.contains_minute(series.minute_of_day(t)))
        .collect();
    if in_window.is_empty() {
        return Err(Error::InsufficientData(format!("no valid samples in window {}", condition.window)));
    }
    let baseline_hits = in_window.iter().filter(|&&t| spike[t]).count();
    let baseline = T::from_usize_lossy(baseline_hits) / T::from_usize_lossy(in_window.len());
    let conditioned: Vec<usize> = in_window
        .into_iter()
        .filter(|&t| series.prices[t] >= condition.low && series.prices[t] <= condition.high)
        .collect();
    let mut hits = Vec::with_capacity(delays.len());
    let mut counts = Vec::with_capacity(delays.len());
    let mut probability = Vec::with_capacity(delays.len());
    for &k in delays {
        let mut n = 0;
        let mut h = 0;
        for &t in &conditioned {
            if t + k < series.len() && series.is_valid(t + k) {
                n += 1;
                h += usize::from(spike[t + k]);
            }
        }
        hits.push(h);
        counts.push(n);
        probability.push((n > 0).then(|| T::from_usize_lossy(h) / T::from_usize_lossy(n)));
    }
    Ok(SpikeProbProfile {
        condition,
        threshold,
        lags: delays.to_vec(),
        hits,
        counts,
        probability,
        baseline,
        baseline_count: baseline_hits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::parse_timestamp;

    fn series(prices: Vec<f64>) -> AlignedSeries<f64> {
        let n = prices.len();
        AlignedSeries::from_values(parse_timestamp("2008-01-07T00:00", None).unwrap(), 15, prices, vec![1.0; n]).unwrap()
    }

    #[test]
    fn indicator_basics() {
        let mut p = vec![30.0; 96];
        assert!(spike_indicator(&series(p.clone()), 1e9).iter().all(|&s| !s));
        p[40] = 900.0;
        assert_eq!(spike_indicator(&series(p), 144.4187).iter().filter(|&&s| s).count(), 1);
    }

    #[test]
    fn no_spikes_gives_zero_probability() {
        let s = series(vec![30.0; 96 * 3]);
        let cond = SpikeCondition { window: TodWindow::full_day(), low: 0.0, high: 100.0 };
        let prof = conditional_spike_prob(&s, cond, &[1, 2, 3], 144.4187).unwrap();
        assert!(prof.probability.iter().all(|p| *p == Some(0.0)));
        assert_eq!(prof.baseline, 0.0);
    }

    #[test]
    fn empty_condition_reports_none() {
        let s = series(vec![30.0; 96]);
        let cond = SpikeCondition { window: TodWindow::full_day(), low: 500.0, high: 1000.0 };
        let prof = conditional_spike_prob(&s, cond, &[1], 144.4187).unwrap();
        assert_eq!(prof.counts, vec![0]);
        assert_eq!(prof.probability, vec![None]);
    }

    #[test]
    fn probability_is_ratio_of_counts() {
        let p: Vec<f64> = (0..960).map(|i| if i % 7 == 0 || i % 11 == 0 { 300.0 } else { 20.0 }).collect();
        let s = series(p);
        let cond = SpikeCondition { window: "09:00-15:00".parse().unwrap(), low: 200.0, high: 400.0 };
        let prof = conditional_spike_prob(&s, cond, &(1..=12).collect::<Vec<_>>(), 144.4187).unwrap();
        for i in 0..12 {
            assert_eq!(prof.probability[i].unwrap(), prof.hits[i] as f64 / prof.counts[i] as f64);
        }
        let wide = SpikeCondition { window: "03:00-15:00".parse().unwrap(), ..cond };
        let wide = conditional_spike_prob(&s, wide, &prof.lags, 144.4187).unwrap();
        assert!(wide.counts.iter().zip(&prof.counts).all(|(a, b)| a >= b));
    }
}
