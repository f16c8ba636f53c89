//! Experiment runner around `spectracode-core`: JSON configs, CSV/JSON
//! artifact emission with a hashed manifest, and the convergence sweep.

pub mod config;
pub mod run;

pub use config::{CodeDescriptor, ExperimentConfig, ExperimentKind};
pub use run::{run_experiment, sweep_convergence, RunOutput, SweepResult};

pub use spectracode_core as core;
