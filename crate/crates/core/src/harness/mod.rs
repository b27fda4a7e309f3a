//! Seeded experiment episodes, parameter sweeps, result files and the command line.

pub mod cli;
pub mod config;
pub mod emit;
pub mod runner;

pub use config::{AgentKind, ExperimentConfig, PlannerSettings};
pub use emit::{emit_result, emit_sweep, OutputFormat};
pub use runner::{average_reward, mix_seed, run_experiment, sweep, CycleRecord, ExperimentResult, Summary, SweepPoint};
