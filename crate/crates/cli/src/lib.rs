//! Batch experiment runner: a TOML config names a system, an optional
//! blow-up stage and a list of probes; running it writes CSV, JSON and SVG
//! artifacts plus a `summary.json` into an output directory.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod plot;
pub mod probes;
pub mod run;

pub use config::{load_config, parse_config, parse_experiment, ConfigError, Experiment, ExperimentConfig, PROBE_KINDS};
pub use run::{run_experiment, ReportBundle, RunError, Status};
