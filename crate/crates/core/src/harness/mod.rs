//! Experiment configuration, seeded sweeps and CSV output.

pub mod config;
pub mod runner;
pub mod table;

pub use config::{AttackSpec, ExperimentConfig, TagFunctionSpec};
pub use runner::{run_attack_sweep, run_auth_sweep, run_bounds, run_calibrate, tabulate_bounds};
pub use table::Table;
