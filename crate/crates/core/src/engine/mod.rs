//! Amoebot structures, pin configurations, circuits and the synchronous
//! round loop.

mod circuit;
pub mod io;
mod sim;
mod structure;

pub use circuit::{compute_circuits, CircuitPartition, PinConfig, UnionFind};
pub use sim::{
    run, AmoebotTrace, CoinScript, InitView, Protocol, RoundTrace, RunResult, RunStatus,
    Simulation, StepCtx,
};
pub use structure::{build_structure, local_index_for, EdgeId, PhysicalPin, Structure};

/// Largest supported number of pins per bond.
pub const MAX_PINS: usize = 8;
/// Local pins per amoebot at the largest pin count.
pub const MAX_LOCAL_PINS: usize = 6 * MAX_PINS;
