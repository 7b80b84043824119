//! Experiment drivers, fits and structured outputs on top of `qsg-core`.

pub mod config;
pub mod error;
pub mod experiments;
pub mod fit;
pub mod output;

pub use config::{ExperimentConfig, ExperimentKind, Model};
pub use error::{HarnessError, Result};
pub use experiments::{run_experiment, ExperimentOutput};
