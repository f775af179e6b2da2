//! Simulator for the geometric amoebot model with reconfigurable circuits.

pub mod alignment;
pub mod engine;
pub mod error;
pub mod exec;
pub mod grid;
pub mod harness;
pub mod leader_consensus;
pub mod parallelogram;
pub mod primitives;
pub mod shapes;
pub mod usr;

pub use error::{Error, Result};
