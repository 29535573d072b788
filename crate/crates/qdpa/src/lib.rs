#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Experiment harness for `qdpa-core`: run configuration, multi-seed
//! incremental runs, configuration comparison, and CSV/JSON outputs.

pub mod config;
pub mod harness;
pub mod io;
pub mod stats;

pub use config::{Baselines, RunConfig};
pub use harness::{compare_configurations, run_incremental, write_outputs, RunOutput, Summary};
