//! Descriptive and inferential statistics over (optionally masked) samples.

mod anova;
mod correlation;
mod descriptive;
pub mod special;

pub use anova::{anova_oneway, post_event_groups, AnovaTable};
pub use correlation::{
    acf, avg_change_after_surge, lagged_correlation, pacf, pearson, surge_events, AcfResult,
};
pub use descriptive::{
    hourly_summary, moments, normal_probability_plot, quantile, BoxSummary, BucketStats, HourlySummary,
    MomentStats, SeriesField,
};
pub use special::{f_tail_p, normal_cdf, normal_quantile, t_tail_p};

/// Borrowed samples with an optional validity mask. Masked-out entries are
/// skipped by every statistic but keep their position for lag arithmetic.
#[derive(Debug, Clone, Copy)]
pub struct Masked<'a, T> {
    values: &'a [T],
    mask: Option<&'a [bool]>,
}

impl<'a, T: Copy> Masked<'a, T> {
    /// `mask` must have the same length as `values`.
    pub fn new(values: &'a [T], mask: &'a [bool]) -> Self {
        assert_eq!(values.len(), mask.len(), "mask length mismatch");
        Self { values, mask: Some(mask) }
    }

    pub fn all(values: &'a [T]) -> Self {
        Self { values, mask: None }
    }

    /// Number of slots, valid or not.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_valid(&self, i: usize) -> bool {
        i < self.values.len() && self.mask.is_none_or(|m| m[i])
    }

    pub fn get(&self, i: usize) -> Option<T> {
        self.is_valid(i).then(|| self.values[i])
    }

    pub fn values(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.values.len()).filter_map(move |i| self.get(i))
    }

    pub fn valid_count(&self) -> usize {
        self.mask.map_or(self.values.len(), |m| m.iter().filter(|&&v| v).count())
    }
}

impl<'a, T: Copy> From<&'a [T]> for Masked<'a, T> {
    fn from(values: &'a [T]) -> Self {
        Self::all(values)
    }
}

impl<'a, T: Copy> From<&'a Vec<T>> for Masked<'a, T> {
    fn from(values: &'a Vec<T>) -> Self {
        Self::all(values)
    }
}
