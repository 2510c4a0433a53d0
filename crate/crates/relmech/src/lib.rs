//! Scenario runner for `relmech-core`: configuration, reports and the shared identity checks.

pub mod config;
pub mod output;
pub mod report;
pub mod scenarios;
pub mod suite;

pub use config::{parse_config, ConfigError, ScenarioConfig, ScenarioKind};
pub use report::{emit_report, Check, Format, RunReport};
pub use scenarios::{run, RunError};
