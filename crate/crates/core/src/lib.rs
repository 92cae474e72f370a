//! Variable importance, screening and hypothesis tests built on the change in
//! the LASSO solution path when covariates are left out.
//!
//! - [`path`]: exact homotopy paths, cross-validated and adaptive LASSO fits
//! - [`metric`]: exact `||.||_{s,t}` distances between paths and LOCO statistics
//! - [`inference`]: residual-bootstrap tests and permutation intervals
//! - [`screening`]: threshold and top-K screening
//! - [`sim`]: simulation designs, classical baselines and experiments

pub mod data;
pub mod error;
pub mod inference;
pub mod linalg;
pub mod metric;
pub mod path;
pub mod screening;
pub mod seed;
pub mod sim;

pub use data::{Dataset, Hypothesis};
pub use error::{LocoError, Result};
pub use inference::{
    bootstrap_replicate, bootstrap_test, permutation_interval, permutation_intervals,
    residuals_from_initial, single_coefficient_test, BootstrapConfig, InitialEstimator,
    PermutationInterval, TestOutcome,
};
pub use metric::{
    loco_statistic, loco_statistics, merged_knots, normalized_importance, null_statistic,
    path_distance, segment_abs_power_integral, Exponent, ImportanceReport, NormSpec, Power,
};
pub use path::{
    adaptive_lasso, cv_lasso, eval_path, lasso_path, soft_threshold, AdaptiveFit, CvLasso, Design,
    SolutionPath,
};
pub use screening::{screen, ScreeningReport, ScreeningRule};
