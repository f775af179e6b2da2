use thiserror::Error;

use crate::grid::GridCoord;

#[derive(Debug, Error)]
pub enum Error {
    #[error("structure is empty")]
    EmptyStructure,
    #[error("duplicate coordinate {0}")]
    DuplicateCoord(GridCoord),
    #[error("structure is not connected")]
    DisconnectedStructure,
    #[error("pins per edge must be in 1..={max}, got {got}")]
    InvalidPinCount { got: usize, max: usize },
    #[error("{coords} coordinates but {orientations} orientations")]
    OrientationCountMismatch { coords: usize, orientations: usize },
    #[error("amoebot {0} is not incident to the edge")]
    NotIncident(GridCoord),
    #[error("no amoebot at {0}")]
    UnknownAmoebot(GridCoord),
    #[error("protocol failed in round {round}: {reason}")]
    ProtocolPanic { round: u64, reason: String },
    #[error("chain is broken: {0}")]
    ChainBroken(String),
    #[error("rank {rank} out of range for {marked} marked amoebots")]
    RankOutOfRange { rank: usize, marked: usize },
    #[error("search budget exceeded")]
    SearchBudgetExceeded,
    #[error("no boundary face")]
    NoBoundary,
    #[error("shape is not minimal")]
    ShapeNotMinimal,
    #[error("shape is not connected")]
    ShapeDisconnected,
    #[error("shape has {0} faces, at most 6 are supported")]
    ShapeTooLarge(usize),
    #[error("no valid perturbation")]
    NoValidPerturbation,
    #[error("{phase} reached no common verdict after {rounds} rounds")]
    NoVerdict { phase: &'static str, rounds: u64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
