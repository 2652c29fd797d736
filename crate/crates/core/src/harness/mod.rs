//! Diagnostics and experiment drivers: kernel density estimates,
//! Kolmogorov–Smirnov distances and the figure pipelines.

pub mod experiment;
pub mod kde;
pub mod ks;

pub use experiment::{
    density_cell, recipe_model, run_experiment, DensityCell, ExperimentConfig, ExperimentKind, Recipe, ResultTable,
};
pub use kde::{default_bandwidth, epanechnikov_kde, KdeEstimate};
pub use ks::{ks_statistic, ks_two_sample, ks_two_sample_critical, KS_C_ONE_PERCENT};
