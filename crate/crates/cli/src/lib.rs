//! Scenario files, reports and the command implementations behind the
//! `relrocket` binary.

pub mod config;
pub mod run;
pub mod schema;

pub use config::{parse_scenario, ConfigError, Scenario};
pub use run::{design, execute, verify, Check, Design, Execution, RunReport, Verdict};
