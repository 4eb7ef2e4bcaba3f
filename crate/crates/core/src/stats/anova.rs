use serde::{Deserialize, Serialize};

use super::special::f_tail_p;
use crate::error::{Error, Result};
use crate::ingest::AlignedSeries;
use crate::scalar::Scalar;

/// One-way ANOVA decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaTable<T> {
    pub ss_groups: T,
    pub ss_error: T,
    pub ss_total: T,
    pub df_groups: usize,
    pub df_error: usize,
    pub df_total: usize,
    pub ms_groups: T,
    pub ms_error: T,
    /// `T::max_value()` when the within-group variation is exactly zero.
    pub f_stat: T,
    pub p_value: T,
}

pub fn anova_oneway<T: Scalar>(groups: &[Vec<T>]) -> Result<AnovaTable<T>> {
    if groups.len() < 2 {
        return Err(Error::InsufficientData(format!("ANOVA needs 2 groups, got {}", groups.len())));
    }
    if let Some(i) = groups.iter().position(|g| g.is_empty()) {
        return Err(Error::InsufficientData(format!("group {i} is empty")));
    }
    let n: usize = groups.iter().map(Vec::len).sum();
    let k = groups.len();
    if n <= k {
        return Err(Error::InsufficientData("no within-group degrees of freedom".into()));
    }
    let grand = groups.iter().flatten().copied().sum::<T>() / T::from_usize_lossy(n);
    let (mut ss_groups, mut ss_error, mut ss_total) = (T::zero(), T::zero(), T::zero());
    for g in groups {
        let m = g.iter().copied().sum::<T>() / T::from_usize_lossy(g.len());
        ss_groups = ss_groups + T::from_usize_lossy(g.len()) * (m - grand) * (m - grand);
        for &x in g {
            ss_error = ss_error + (x - m) * (x - m);
            ss_total = ss_total + (x - grand) * (x - grand);
        }
    }
    let df_groups = k - 1;
    let df_error = n - k;
    let ms_groups = ss_groups / T::from_usize_lossy(df_groups);
    let ms_error = ss_error / T::from_usize_lossy(df_error);
    let (f_stat, p_value) = if ss_error == T::zero() {
        if ss_groups == T::zero() {
            return Err(Error::Degenerate("all groups constant and equal; F undefined".into()));
        }
        (T::max_value(), T::zero())
    } else {
        let f = ms_groups / ms_error;
        let p = f_tail_p(f, T::from_usize_lossy(df_groups), T::from_usize_lossy(df_error))?;
        (f, p)
    };
    Ok(AnovaTable {
        ss_groups,
        ss_error,
        ss_total,
        df_groups,
        df_error,
        df_total: n - 1,
        ms_groups,
        ms_error,
        f_stat,
        p_value,
    })
}

/// Loads observed `k = 0..=max_lag` steps after each event, one group per lag.
pub fn post_event_groups<T: Scalar>(series: &AlignedSeries<T>, events: &[usize], max_lag: usize) -> Vec<Vec<T>> {
    (0..=max_lag)
        .map(|k| {
            events
                .iter()
                .filter(|&&t| series.is_valid(t + k))
                .map(|&t| series.loads[t + k])
                .collect()
        })
        .collect()
}
