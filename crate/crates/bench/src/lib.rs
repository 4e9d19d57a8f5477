//! Experiment grids for frequency-domain augmentation on top of
//! `domshuffle-core`: configuration, execution and result tables.

pub mod config;
pub mod error;
pub mod results;
pub mod runner;

pub use config::{ExperimentConfig, ModelConfig, OutputFormat};
pub use error::{BenchError, Result};
pub use results::{emit_all, emit_results, read_json, CellSummary, ExperimentResult, RunRecord};
pub use runner::{plan, run_experiment, run_on_dataset, Cell, Sweep};
