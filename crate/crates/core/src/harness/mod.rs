//! Generators, experiment runner, statistics and artifact writers.

pub mod experiment;
pub mod generators;
pub mod stats;
pub mod svg;
pub mod trace;

pub use experiment::{
    read_stats, run_experiment, run_trial, trial_seed, write_stats, ExperimentConfig, ProtocolKind, TrialOutput,
    TrialStats,
};
pub use stats::{fit_log2, median, LogFit, Summary, TrialRecord};
