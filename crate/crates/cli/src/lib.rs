//! Experiment runner for the `shrinkinit` initializers: JSON configs in,
//! per-cell metrics and weight-dump CSVs out.

pub mod config;
pub mod probe;
pub mod runner;

pub use config::{DatasetSpec, ExperimentConfig};
pub use probe::{log_log_slope, probe_csv, timing_probe};
pub use runner::{run, run_experiment, CellOutcome, CellStatus, RunReport};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] shrinkinit::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl RunError {
    /// Process exit code: 2 for bad configuration, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            _ => 1,
        }
    }
}
