//! Experiment harness around the numerical core: declarative scenario
//! suites, a CLI, and machine-readable reports.

pub mod commands;
pub mod config;
pub mod error;
pub mod points;
pub mod report;
pub mod scenario;
