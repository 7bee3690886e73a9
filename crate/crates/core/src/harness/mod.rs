//! Experiment orchestration: strict key-value run configuration, initial-data
//! recipes, the viscosity sweep on a shared Wiener path, Monte-Carlo
//! aggregation, CSV and SVG reporting, trajectory storage, the invariant
//! self-test suite, and the command-line interface.

pub mod cli;
pub mod config;
pub mod plot;
pub mod recipes;
pub mod report;
pub mod selftest;
pub mod storage;
pub mod sweep;

pub use config::{build_run_config, parse_config_str, RawConfig, RunConfig, RunControls, SweepSpec};
pub use recipes::{make_ill_prepared, make_initial_state, RecipeSpec};
pub use sweep::{inviscid_sweep, SweepEntry, SweepResult};
