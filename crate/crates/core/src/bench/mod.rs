//! Experiment configs, seeded runs with retries, parameter sweeps, data
//! generation, and snapshot export. The command-line front end is a thin
//! layer over this module.

mod config;
mod data;
mod run;
mod sweep;

pub use config::{
    pacmann_defaults, CountsBlock, DataOptions, EvalOptions, ExperimentConfig, Preset, SamplerBlock, SamplerKind,
    ScheduleBlock,
};
pub use data::{export_snapshots, gendata, SnapshotExport, BURGERS_TABLE, DEFAULT_OBSERVATION_ROWS};
pub use run::{run_experiment, ExperimentOutcome, SeedRuns, RETRY_SEED_STRIDE};
pub use sweep::{run_sweep, BaseConfig, SweepCell, SweepSpec};
