//! Reusable protocol building blocks.

pub mod add_tree;
pub mod barrier;
pub mod global;
pub mod local_leader;
pub mod message;
pub mod single_pin;

pub use add_tree::{chain_roles, AddTreeMachine, BinaryAddTree, BinarySearch, ChainRole, SearchMachine, SearchOutcome};
pub use barrier::{barrier_check, barrier_released, SyncBarrier};
pub use global::EstablishGlobalCircuit;
pub use local_leader::{AgreePinLabels, LocalLeaderElection, LocalLeaderMachine, PinAgreementMachine};
pub use message::{MessageMachine, MultiPinMessage};
pub use single_pin::{SinglePinMachine, SinglePinMessage};

use crate::engine::PinConfig;

/// Wires every pin of bond `x` to the matching pin of bond `y`. Lanes keep
/// their index along a straight line under a common chirality.
pub fn connect_bonds(cfg: &mut PinConfig, k: usize, x: usize, y: usize) {
    for i in 0..k {
        cfg.connect(x * k + i, y * k + (k - 1 - i));
    }
}
