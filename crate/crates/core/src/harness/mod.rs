//! Experiment harness: scenarios, replications, regret tables and reports.

pub mod data;
pub mod export;
pub mod rng;
pub mod runner;
pub mod scenario;
pub mod slope;

pub use export::{export_results, regenerate_report};
pub use runner::{
    run_experiment, run_replication, Experiment, RegretTrajectory, ResultRow, ResultTable, DEFAULT_MASTER_SEED,
};
pub use scenario::{load_scenario, preset, preset_names, Scenario, ScenarioConfig};
pub use slope::{loglog_slope, SlopeEstimate};
