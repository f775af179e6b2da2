//! Global leader election and constant-range consensus.

pub mod consensus;
pub mod leader;

pub use consensus::{Consensus, ConsensusMachine};
pub use leader::{Coin, LeaderElection, LeaderMachine, LeaderPhase, Verdict};
