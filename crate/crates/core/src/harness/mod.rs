//! Experiment configuration, batch execution, statistics and CSV output.
//!
//! A typical batch goes [`load_config`] → [`run_experiment`] → [`emit_results`]. Given
//! the same config text and master seed, every emitted byte is reproducible: runs are
//! executed in parallel but collected and written in a fixed order.

pub mod config;
pub mod experiment;
pub mod report;
pub mod stats;

pub use config::{load_config, parse_config, ExperimentEntry, ExperimentSpec};
pub use experiment::{run_experiment, seed_for_run, ConfigResult, ExperimentOutcome, RunFailure, StatRow};
pub use report::{curve_csv, emit_results, format_sci, summary_csv, CURVE_HEADER, SUMMARY_HEADER};
pub use stats::{aggregate_stats, rank_sum_pvalue};
