//! Scenario runner: named models, configuration parsing, the full pipeline
//! and machine-readable reports.

mod config;
mod models;
mod report;
mod runner;

pub use config::{
    parse_config, BatteryConfig, OutputConfig, OutputFormat, ParsedConfig, SamplingConfig,
    ScenarioConfig, SystemModel,
};
pub use models::{build_protocol, ising_hamiltonian, list_models, ModelInfo};
pub use report::RunReport;
pub use runner::{run_scenario, Check};
