//! End-to-end experiments: configuration, the replicated pipeline comparing
//! graph ranks with their branching-process limits, and report output.

pub mod commands;
mod config;
mod output;
mod pipeline;
mod tail;

pub use config::{ExperimentConfig, RankingSettings, TailCheckConfig};
pub use output::{batches_csv, ecdf_csv, experiment_report, size_report, write_experiment};
pub use pipeline::{r_star_batch, run_experiment, ExperimentOutcome, ReplicationFailure, SizeResult, BATCH_NAMES};
pub use tail::{run_tailcheck, tail_limits, TailReport};
