//! Batch harness for the qmarg simulator: configuration, reports and the
//! command implementations behind the `qmarg` binary.

pub mod commands;
pub mod config;
pub mod report;

pub use config::RunConfig;
pub use report::RunReport;
