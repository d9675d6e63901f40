//! Experiment procedures: variance curves, accuracy counts, parameter
//! categories, grid search and scaling runs.
//!
//! Seeds are split from one root seed: instance `k` uses
//! `derive_seed(root, stream::INSTANCE + k)` and hash trial `t` uses
//! `derive_seed(root, stream::HASHES + t)`.

mod correctness;
mod grid;
mod output;
mod scaling;
pub mod stats;
mod variance;

use crate::rng::{derive_seed, stream};

pub use correctness::{
    categorize, correctness_metrics, fail_is_certain, required_passes, CorrectnessReport, ParameterCategory,
    ERROR_TOLERANCE, MAGNITUDE_THRESHOLD,
};
pub use grid::{
    correctness_experiment, dominates, evaluate, grid_search, mark_pareto, timed_sketch, CorrectnessConfig,
    CorrectnessRun, GridCell, GridConfig, SketchRun, DEFAULT_C_B_GRID, DEFAULT_C_D_GRID,
};
pub use output::{
    correctness_rows, grid_rows, hex_digest, timing_rows, variance_rows, write_rows, CorrectnessRow, GridRow,
    OutputFormat, RunInfo, TimingRow, VarianceRow, LIB_VERSION,
};
pub use scaling::{host_label, scaling_run, Method, ScalingConfig, TimingRecord, TimingSummary};
pub use variance::{sample_estimates, variance_experiment, EstimateSamples, VariancePoint, VarianceResult};

/// Seed of instance `index`.
pub fn instance_seed(root: u64, index: u64) -> u64 {
    derive_seed(root, stream::INSTANCE + index)
}

/// Hash seed of trial `index`.
pub fn trial_seed(root: u64, index: u64) -> u64 {
    derive_seed(root, stream::HASHES + index)
}
