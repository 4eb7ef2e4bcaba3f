use serde::{Deserialize, Serialize};

use super::special::normal_quantile;
use super::Masked;
use crate::error::{Error, Result};
use crate::ingest::{AlignedSeries, TimeOfDay};
use crate::scalar::Scalar;

/// Central-moment summary. `std`, skewness and kurtosis use the biased
/// (divide-by-n) estimators; kurtosis is the raw `μ4/σ⁴`, not excess.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentStats<T> {
    pub n: usize,
    pub mean: T,
    pub std: T,
    pub skewness: T,
    pub kurtosis: T,
}

pub fn moments<'a, T: Scalar>(x: impl Into<Masked<'a, T>>) -> Result<MomentStats<T>> {
    let x = x.into();
    let n = x.valid_count();
    if n < 4 {
        return Err(Error::Degenerate(format!("moments need at least 4 valid samples, got {n}")));
    }
    let nf = T::from_usize_lossy(n);
    let mean = x.values().sum::<T>() / nf;
    let (mut m2, mut m3, mut m4) = (T::zero(), T::zero(), T::zero());
    let mut scale = T::zero();
    for v in x.values() {
        let d = v - mean;
        let d2 = d * d;
        m2 = m2 + d2;
        m3 = m3 + d2 * d;
        m4 = m4 + d2 * d2;
        scale = scale.max(v.abs());
    }
    m2 = m2 / nf;
    m3 = m3 / nf;
    m4 = m4 / nf;
    let std = m2.sqrt();
    if !(std > T::lit(8.0) * T::epsilon() * scale) {
        return Err(Error::Degenerate("constant input has undefined skewness and kurtosis".into()));
    }
    Ok(MomentStats {
        n,
        mean,
        std,
        skewness: m3 / (m2 * std),
        kurtosis: m4 / (m2 * m2),
    })
}

fn sorted_valid<'a, T: Scalar>(x: Masked<'a, T>) -> Vec<T> {
    let mut v: Vec<T> = x.values().collect();
    v.sort_by(|a, b| a.partial_cmp(b).expect("NaN in sample"));
    v
}

/// Linear interpolation between order statistics at rank `(n - 1) q`.
fn quantile_sorted<T: Scalar>(sorted: &[T], q: T) -> T {
    let h = T::from_usize_lossy(sorted.len() - 1) * q;
    let lo = h.floor();
    let i = lo.to_usize().unwrap_or(0).min(sorted.len() - 1);
    if i + 1 >= sorted.len() {
        return sorted[i];
    }
    sorted[i] + (h - lo) * (sorted[i + 1] - sorted[i])
}

/// Empirical quantile, linear between order statistics (the "type 7" rule:
/// rank `h = (n - 1) q`, zero-based).
pub fn quantile<'a, T: Scalar>(x: impl Into<Masked<'a, T>>, q: T) -> Result<T> {
    if !(q >= T::zero() && q <= T::one()) {
        return Err(Error::Domain(format!("quantile fraction {q} outside [0, 1]")));
    }
    let sorted = sorted_valid(x.into());
    if sorted.is_empty() {
        return Err(Error::InsufficientData("quantile of an empty sample".into()));
    }
    Ok(quantile_sorted(&sorted, q))
}

/// `(theoretical normal quantile, empirical order statistic)` pairs using
/// plotting positions `(i - 0.5) / n`.
pub fn normal_probability_plot<'a, T: Scalar>(x: impl Into<Masked<'a, T>>) -> Result<Vec<(T, T)>> {
    let sorted = sorted_valid(x.into());
    let n = sorted.len();
    if n < 2 {
        return Err(Error::Degenerate(format!("probability plot needs 2 samples, got {n}")));
    }
    let nf = T::from_usize_lossy(n);
    sorted
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            let p = (T::from_usize_lossy(i) + T::lit(0.5)) / nf;
            normal_quantile(p).map(|z| (z, v))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeriesField {
    Price,
    Load,
}

/// Five-number summary with Tukey whiskers (1.5 × IQR fences).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxSummary<T> {
    pub min: T,
    pub q1: T,
    pub median: T,
    pub q3: T,
    pub max: T,
    pub lower_whisker: T,
    pub upper_whisker: T,
    pub outliers: Vec<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketStats<T> {
    pub start: String,
    pub count: usize,
    /// `None` when no valid sample falls in the bucket.
    pub summary: Option<BoxSummary<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HourlySummary<T> {
    pub field: SeriesField,
    pub bucket_minutes: u32,
    pub buckets: Vec<BucketStats<T>>,
}

fn box_summary<T: Scalar>(mut v: Vec<T>) -> BoxSummary<T> {
    v.sort_by(|a, b| a.partial_cmp(b).expect("NaN in sample"));
    let q1 = quantile_sorted(&v, T::lit(0.25));
    let median = quantile_sorted(&v, T::lit(0.5));
    let q3 = quantile_sorted(&v, T::lit(0.75));
    let fence = T::lit(1.5) * (q3 - q1);
    let (lo_fence, hi_fence) = (q1 - fence, q3 + fence);
    let inside = || v.iter().copied().filter(|&x| x >= lo_fence && x <= hi_fence);
    BoxSummary {
        min: v[0],
        q1,
        median,
        q3,
        max: v[v.len() - 1],
        lower_whisker: inside().fold(T::infinity(), T::min),
        upper_whisker: inside().fold(T::neg_infinity(), T::max),
        outliers: v.iter().copied().filter(|&x| x < lo_fence || x > hi_fence).collect(),
    }
}

/// Box-plot statistics per time-of-day bucket (`bucket_minutes` = 60 for
/// hourly, 15 for quarter-hourly).
pub fn hourly_summary<T: Scalar>(
    series: &AlignedSeries<T>,
    field: SeriesField,
    bucket_minutes: u32,
) -> Result<HourlySummary<T>> {
    if bucket_minutes == 0 || 1440 % bucket_minutes != 0 {
        return Err(Error::Domain(format!("bucket width {bucket_minutes} must divide 24h")));
    }
    let span_mins = series.len() as u64 * series.interval_mins as u64;
    if span_mins < 1440 {
        return Err(Error::InsufficientData("hourly summary needs at least one day of samples".into()));
    }
    let n_buckets = (1440 / bucket_minutes) as usize;
    let values = match field {
        SeriesField::Price => &series.prices,
        SeriesField::Load => &series.loads,
    };
    let mut groups: Vec<Vec<T>> = vec![Vec::new(); n_buckets];
    for i in (0..series.len()).filter(|&i| series.is_valid(i)) {
        groups[(series.minute_of_day(i) / bucket_minutes) as usize].push(values[i]);
    }
    let buckets = groups
        .into_iter()
        .enumerate()
        .map(|(b, g)| BucketStats {
            start: TimeOfDay::from_minutes(b as u32 * bucket_minutes)
                .map(|t| t.to_string())
                .unwrap_or_default(),
            count: g.len(),
            summary: (!g.is_empty()).then(|| box_summary(g)),
        })
        .collect();
    Ok(HourlySummary { field, bucket_minutes, buckets })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::parse_timestamp;

    fn brute_moments(x: &[f64]) -> (f64, f64, f64, f64) {
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let c = |p: i32| x.iter().map(|v| (v - mean).powi(p)).sum::<f64>() / n;
        (mean, c(2).sqrt(), c(3) / c(2).powf(1.5), c(4) / c(2).powi(2))
    }

    #[test]
    fn one_to_five() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let m = moments(&x[..]).unwrap();
        let (mean, std, skew, kurt) = brute_moments(&x);
        assert_eq!(m.mean, 3.0);
        assert!((m.std - std).abs() < 1e-14 && (m.std - 2f64.sqrt()).abs() < 1e-14);
        assert!((m.skewness - skew).abs() < 1e-14 && m.skewness.abs() < 1e-15);
        assert!((m.kurtosis - kurt).abs() < 1e-14 && (m.kurtosis - 1.7).abs() < 1e-14);
        assert_eq!(mean, 3.0);
    }

    #[test]
    fn degenerate_moments() {
        assert!(matches!(moments(&[2.0f64; 10][..]), Err(Error::Degenerate(_))));
        assert!(matches!(moments(&[1.0f64, 2.0, 3.0][..]), Err(Error::Degenerate(_))));
    }

    #[test]
    fn masked_moments_skip_invalid() {
        let x = [1.0, 2.0, 1e9, 3.0, 4.0, 5.0];
        let mask = [true, true, false, true, true, true];
        let m = moments(Masked::new(&x, &mask)).unwrap();
        assert_eq!(m.n, 5);
        assert_eq!(m.mean, 3.0);
    }

    #[test]
    fn quantile_rules() {
        let x: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(quantile(&x, 0.0).unwrap(), 1.0);
        assert_eq!(quantile(&x, 1.0).unwrap(), 100.0);
        let q95 = quantile(&x, 0.95).unwrap();
        assert!((95.0..=96.0).contains(&q95));
        assert!((q95 - 95.05).abs() < 1e-12);
        assert!(quantile(&x, 1.5).is_err());
        assert!(quantile(&Vec::<f64>::new(), 0.5).is_err());
    }

    #[test]
    fn probability_plot_of_normal_quantiles_is_diagonal() {
        let n = 50;
        let x: Vec<f64> = (0..n).map(|i| normal_quantile((i as f64 + 0.5) / n as f64).unwrap()).collect();
        let pts = normal_probability_plot(&x).unwrap();
        for (z, v) in pts {
            assert!((z - v).abs() < 1e-9);
        }
        let two = normal_probability_plot(&[3.0, 1.0][..]).unwrap();
        assert_eq!(two.len(), 2);
        assert!(two[0].0 < two[1].0 && two[0].1 == 1.0 && two[1].1 == 3.0);
    }

    fn day_series(days: usize, price: impl Fn(usize) -> f64) -> AlignedSeries<f64> {
        let n = days * 96;
        let start = parse_timestamp("2008-01-09T00:00", None).unwrap();
        AlignedSeries::from_values(start, 15, (0..n).map(price).collect(), vec![100.0; n]).unwrap()
    }

    #[test]
    fn hourly_constant_series() {
        let s = day_series(2, |_| 40.0);
        let h = hourly_summary(&s, SeriesField::Price, 60).unwrap();
        assert_eq!(h.buckets.len(), 24);
        for b in &h.buckets {
            assert_eq!(b.count, 8);
            let sm = b.summary.as_ref().unwrap();
            assert_eq!(sm.median, 40.0);
            assert_eq!(sm.q3 - sm.q1, 0.0);
        }
        let quarter = hourly_summary(&s, SeriesField::Load, 15).unwrap();
        assert_eq!(quarter.buckets.len(), 96);
        assert!(quarter.buckets.iter().all(|b| b.count == 2));
    }

    #[test]
    fn hourly_spike_is_outlier() {
        let spike_at = 96 + 15 * 4; // day 2, 15:00
        let s = day_series(3, |i| if i == spike_at { 2000.0 } else { 40.0 + (i % 4) as f64 });
        let h = hourly_summary(&s, SeriesField::Price, 60).unwrap();
        let b = h.buckets[15].summary.as_ref().unwrap();
        assert_eq!(h.buckets[15].start, "15:00");
        assert_eq!(b.outliers, vec![2000.0]);
        assert!(h.buckets[14].summary.as_ref().unwrap().outliers.is_empty());
    }

    #[test]
    fn hourly_empty_bucket_and_short_series() {
        let s = day_series(1, |_| 1.0);
        let s = s.masked_where(|i| i >= 4);
        let h = hourly_summary(&s, SeriesField::Price, 60).unwrap();
        assert!(h.buckets[0].summary.is_none());
        assert_eq!(h.buckets[0].count, 0);
        let start = parse_timestamp("2008-01-09T00:00", None).unwrap();
        let short = AlignedSeries::from_values(start, 15, vec![1.0; 10], vec![1.0; 10]).unwrap();
        assert!(hourly_summary(&short, SeriesField::Price, 60).is_err());
    }
}
