//! Configuration language, command runner and report writer behind the
//! `qal` binary.

pub mod config;
pub mod report;
pub mod run;
pub mod syntax;

pub use config::{parse_config, Command, RunConfig};
pub use report::Report;
pub use run::{report_exit_code, run, RunError};
pub use syntax::{ConfigError, Diagnostic};
