use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::AlignedSeries;
use crate::scalar::Scalar;
use crate::stats::quantile;

/// How the moderate/high price threshold is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdRule<T> {
    /// Empirical quantile of the valid prices, `0 < q < 1`.
    Quantile(T),
    /// Fixed $/MWh level.
    Explicit(T),
}

/// Partition of valid samples: high iff `P > threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeSplit<T> {
    pub threshold: T,
    pub moderate: Vec<usize>,
    pub high: Vec<usize>,
}

impl<T: Scalar> RegimeSplit<T> {
    pub fn high_fraction(&self) -> f64 {
        let total = self.moderate.len() + self.high.len();
        if total == 0 {
            0.0
        } else {
            self.high.len() as f64 / total as f64
        }
    }
}

pub fn split_regimes<T: Scalar>(series: &AlignedSeries<T>, rule: ThresholdRule<T>) -> Result<RegimeSplit<T>> {
    let threshold = match rule {
        ThresholdRule::Quantile(q) => {
            if !(q > T::zero() && q < T::one()) {
                return Err(Error::Domain(format!("regime quantile {q} outside (0, 1)")));
            }
            let n = series.valid_count();
            if n < 20 {
                return Err(Error::InsufficientData(format!("quantile split needs 20 valid samples, have {n}")));
            }
            quantile(series.prices_masked(), q)?
        }
        ThresholdRule::Explicit(t) => {
            if t.is_nan() {
                return Err(Error::Domain("NaN threshold".into()));
            }
            t
        }
    };
    let (high, moderate) = (0..series.len())
        .filter(|&i| series.is_valid(i))
        .partition(|&i| series.prices[i] > threshold);
    Ok(RegimeSplit { threshold, moderate, high })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::parse_timestamp;

    fn series(prices: Vec<f64>) -> AlignedSeries<f64> {
        let n = prices.len();
        AlignedSeries::from_values(parse_timestamp("2008-01-01T00:00", None).unwrap(), 15, prices, vec![1.0; n])
            .unwrap()
    }

    #[test]
    fn infinite_threshold_has_no_high() {
        let s = series((0..30).map(f64::from).collect());
        let split = split_regimes(&s, ThresholdRule::Explicit(f64::INFINITY)).unwrap();
        assert!(split.high.is_empty());
        assert_eq!(split.moderate.len(), 30);
    }

    #[test]
    fn ties_at_threshold_are_moderate() {
        let s = series(vec![7.0; 25]);
        let split = split_regimes(&s, ThresholdRule::Explicit(7.0)).unwrap();
        assert!(split.high.is_empty());
        let q = split_regimes(&s, ThresholdRule::Quantile(0.95)).unwrap();
        assert_eq!(q.threshold, 7.0);
        assert!(q.high.is_empty());
    }

    #[test]
    fn quantile_errors() {
        let s = series((0..30).map(f64::from).collect());
        assert!(split_regimes(&s, ThresholdRule::Quantile(1.0)).is_err());
        assert!(split_regimes(&s, ThresholdRule::Quantile(0.0)).is_err());
        let short = series((0..10).map(f64::from).collect());
        assert!(split_regimes(&short, ThresholdRule::Quantile(0.5)).is_err());
    }

    #[test]
    fn partition_skips_masked() {
        let s = series((0..40).map(f64::from).collect()).masked_where(|i| i % 3 != 0);
        let split = split_regimes(&s, ThresholdRule::Quantile(0.9)).unwrap();
        assert_eq!(split.high.len() + split.moderate.len(), s.valid_count());
        assert!(split.high.iter().all(|&i| s.prices[i] > split.threshold));
    }
}
