//! Experiment runner for `pdeaccel-core`.
//!
//! A run is described by a small `key = value` document (see [`config`]),
//! expanded into one solve per `(damping, mesh, seed)` and summarized as a
//! table. Fields, energy traces, previews and contact maps are dumped as
//! plain files (see [`output`]).

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;
pub mod runner;

pub use config::{parse_config, preset, ConfigError, ExperimentConfig, PRESETS};
pub use runner::{run_experiment, run_single, RunError, RunRow, Summary};
