//! Reproducible verification suites over `bergman-core`, reported as CSV rows.

pub mod config;
pub mod error;
pub mod experiments;
pub mod report;
pub mod spaces;

pub use config::{ExperimentConfig, Windows};
pub use error::{HarnessError, Result};
pub use report::{Report, ReportRow};
