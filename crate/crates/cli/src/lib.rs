//! Experiment driver: configuration, suites, reports and manifests.

pub mod config;
pub mod manifest;
pub mod plots;
pub mod report;
pub mod runner;
pub mod suites;

pub use config::Config;
pub use report::{CheckLine, SuiteReport};
pub use suites::{run_suite, SuiteKind};
