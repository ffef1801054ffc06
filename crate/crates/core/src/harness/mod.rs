//! Experiment runner: configuration, execution, and deterministic reports.

pub mod config;
pub mod experiments;
pub mod grid;
pub mod report;

pub use config::{
    epr_state, werner_state, ChannelSource, ConfigFile, ExperimentConfig, ExperimentKind,
    GadgetParams, StateSource,
};
pub use experiments::run_experiment;
pub use grid::{qubit_grid_lower_bound, GridBound};
pub use report::{ExperimentResult, Report};
