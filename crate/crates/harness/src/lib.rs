//! Benchmark harness for the evidence counterfactual explainers in `evcf-core`:
//! sparse data ingestion, experiment orchestration and report emission.

pub mod config;
pub mod data;
mod error;
pub mod experiment;
pub mod report;
pub mod synthetic;

pub use config::{ExperimentConfig, ModelSource};
pub use error::{HarnessError, Result};
pub use experiment::{run_experiment, run_grid, Algorithm, BenchmarkRecord, RecordStatus, RunSettings};
