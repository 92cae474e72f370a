//! Simulation designs, classical baselines and Monte-Carlo experiments.

mod baselines;
mod design;
mod experiment;

pub use baselines::{
    f_test, f_test_pvalue, marginal_scores, sis_rank, t_test, t_test_pvalue, ClassicalTest,
};
pub use design::{gaussian_design, gen_dataset, Covariance, SimDesign};
pub use experiment::{
    experiment_power, experiment_screening, experiment_size, CellSummary, Experiment, Method,
    ReplicateRecord, SimResult,
};
