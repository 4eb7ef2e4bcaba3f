//! Regime segmentation, least squares with inference, and ARX/Hammerstein
//! identification.

mod arx;
mod ols;
mod regime;
mod tf;

pub use arx::{
    cross_validate, fit_ar, joint_arx, moderate_rows, peak_rows, select_lags, two_step_arx, ArFit,
    ArxModel, ArxSpec, CvResult, InputTransform, JointFit, LagCriterion, LagSelection, TwoStepFit,
};
pub use ols::{ols, OlsFit};
pub use regime::{split_regimes, RegimeSplit, ThresholdRule};
pub use tf::{polynomial_roots, stability, StabilityReport, TransferFunction};
