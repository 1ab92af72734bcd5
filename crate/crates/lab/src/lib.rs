//! Batch runner for the tangentlab experiments: TOML configs, CSV and SVG
//! outputs, tolerance checks and file comparison.

pub mod compare;
pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod svg;

pub use config::{ExperimentConfig, ExperimentKind};
pub use error::{LabError, LabResult};
pub use experiments::{run, write_outputs, Check, Report};
