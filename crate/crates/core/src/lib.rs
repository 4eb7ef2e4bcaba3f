//! Identification of price-responsive electricity demand.
//!
//! Load is modeled as an ARX process in the moderate-price regime and as a
//! Hammerstein system (log price into a delayed linear filter) when prices
//! surge. The crate covers the whole study: ingesting interval data,
//! descriptive statistics, regime segmentation, two-step estimation,
//! forecasting, spike-recurrence probabilities, welfare geometry and a
//! seeded synthetic data generator for validation.
//!
//! Numerical code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod forecast;
pub mod ingest;
pub mod linalg;
pub mod pipeline;
pub mod scalar;
pub mod spikeprob;
pub mod stats;
pub mod synth;
pub mod sysid;
pub mod welfare;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Series = ingest::AlignedSeries<f64>;
pub type Record = ingest::RawRecord<f64>;
pub type Model = sysid::ArxModel<f64>;
pub type Fit = sysid::OlsFit<f64>;
pub type TwoStep = sysid::TwoStepFit<f64>;
pub type Transfer = sysid::TransferFunction<f64>;
pub type Forecast = forecast::ForecastResult<f64>;
pub type SpikeProfile = spikeprob::SpikeProbProfile<f64>;
pub type Anova = stats::AnovaTable<f64>;
pub type Moments = stats::MomentStats<f64>;
pub type Curve = welfare::LinearCurve<f64>;
pub type Scenario = welfare::MarketScenario<f64>;
