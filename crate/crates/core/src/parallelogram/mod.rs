//! Parallelogram detection and side-ratio checks with a simulated robot.

mod detect;
mod linear;
mod neighborhood;
mod poly;
pub mod polyspec;
mod robot;

pub use detect::{Detection, ParallelogramDetection, DETECTION_ROUNDS};
pub use linear::{LinearRatio, LinearState};
pub use neighborhood::{classify, parallelogram_sides, run_start, NeighborhoodType};
pub use poly::{PolyState, PolynomialRatio};
pub use polyspec::PolySpec;
pub use robot::{Frame, Positioning, POSITIONING_ROUNDS};

use serde::Serialize;

use crate::alignment::{AlignMode, Alignment};
use crate::engine::{Protocol, RunResult, Simulation, Structure};
use crate::error::{Error, Result};
use crate::leader_consensus::{LeaderElection, Verdict};

/// Rounds spent per phase of a ratio check; skipped phases count zero.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PhaseRounds {
    pub detection: u64,
    pub chirality: u64,
    pub compass: u64,
    pub leader: u64,
    pub ratio: u64,
}

impl PhaseRounds {
    pub fn total(&self) -> u64 {
        self.detection + self.chirality + self.compass + self.leader + self.ratio
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RatioReport {
    pub detection: Detection,
    pub accepted: bool,
    pub rounds: PhaseRounds,
}

fn verdict<O: PartialEq + Clone>(r: &RunResult<O>, phase: &'static str) -> Result<O> {
    r.unanimous().filter(|_| r.terminated()).ok_or(Error::NoVerdict { phase, rounds: r.rounds })
}

fn run_phase<P: Protocol>(s: Structure, p: &P, max_rounds: u64, phase: &'static str) -> Result<(P::Output, u64, Structure)>
where
    P::Output: PartialEq + Clone,
{
    let mut sim = Simulation::new(s, p);
    let r = sim.run(max_rounds)?;
    Ok((verdict(&r, phase)?, r.rounds, sim.into_structure()))
}

/// Runs `p` to termination, ignoring the outputs.
fn run_to_end<P: Protocol>(s: Structure, p: &P, max_rounds: u64, phase: &'static str) -> Result<(RunResult<P::Output>, Structure)> {
    let mut sim = Simulation::new(s, p);
    let r = sim.run(max_rounds)?;
    if !r.terminated() {
        return Err(Error::NoVerdict { phase, rounds: r.rounds });
    }
    Ok((r, sim.into_structure()))
}

/// Runs the detection protocol alone.
pub fn detect_parallelogram(s: Structure, max_rounds: u64) -> Result<(Detection, u64)> {
    let (d, rounds, _) = run_phase(s, &ParallelogramDetection, max_rounds, "detection")?;
    Ok((d, rounds))
}

/// Detection, chirality and compass alignment, leader election, then the
/// ratio protocol with the leader as robot. Lines are rejected.
fn ratio_pipeline<P, F>(s: Structure, kappa: u32, max_rounds: u64, protocol: &P, state: F) -> Result<RatioReport>
where
    P: Protocol<Output = bool>,
    F: Fn(bool) -> P::State,
{
    let mut rounds = PhaseRounds::default();
    let (detection, r, s) = run_phase(s, &ParallelogramDetection, max_rounds, "detection")?;
    rounds.detection = r;
    if detection != (Detection::Accept { degenerate: false }) {
        return Ok(RatioReport { detection, accepted: false, rounds });
    }
    let (r, s) = run_to_end(s, &Alignment { mode: AlignMode::Chirality }, max_rounds, "chirality")?;
    rounds.chirality = r.rounds;
    let (r, s) = run_to_end(s, &Alignment { mode: AlignMode::Compass }, max_rounds, "compass")?;
    rounds.compass = r.rounds;
    let (r, s) = run_to_end(s, &LeaderElection { kappa }, max_rounds, "leader")?;
    rounds.leader = r.rounds;
    let states = r.outputs.iter().map(|v| state(*v == Some(Verdict::Leader))).collect();
    let mut sim = Simulation::with_states(s, protocol, states);
    let r = sim.run(max_rounds)?;
    rounds.ratio = r.rounds;
    let accepted = verdict(&r, "ratio")?;
    Ok(RatioReport { detection, accepted, rounds })
}

/// Checks `l = a·h + b` for the shorter side `h` and the longer side `l`.
pub fn detect_linear_ratio(s: Structure, a: u32, b: u32, kappa: u32, max_rounds: u64) -> Result<RatioReport> {
    ratio_pipeline(s, kappa, max_rounds, &LinearRatio { a, b }, LinearState::new)
}

/// Checks `l = p(h)` for the shorter side `h` and the longer side `l`.
pub fn detect_polynomial_ratio(s: Structure, spec: &PolySpec, kappa: u32, max_rounds: u64) -> Result<RatioReport> {
    ratio_pipeline(s, kappa, max_rounds, &PolynomialRatio { spec: spec.clone() }, PolyState::new)
}
