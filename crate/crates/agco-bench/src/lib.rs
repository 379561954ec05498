//! Experiment harness: seeded scenario batches over parameter grids, one
//! result row per (grid point, seed, algorithm) cell, with deterministic
//! ordering and mean/stddev aggregation over seeds.

pub mod experiment;

pub use experiment::{
    run_experiment, AggregateRow, ExperimentResult, ExperimentSpec, Family, GridSpec, ResultRow,
};
