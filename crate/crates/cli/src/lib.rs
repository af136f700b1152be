//! Scenario configuration, deterministic runners and report emission for the
//! `schur-besov` verification library.

pub mod config;
pub mod report;
pub mod run;

pub use config::{parse_config, ConfigError, Kind, Scenario, ScenarioParams};
pub use report::{emit_report, parse_json_lines, Format, ReportError};
pub use run::{run_scenario, run_scenarios, RunDefaults, RunReport, VERSION};

/// The reference scenario set shipped with the tool.
pub const REFERENCE_CONFIG: &str = include_str!("../configs/reference.toml");
