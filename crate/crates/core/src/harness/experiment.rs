//! Monte Carlo experiments: a replayable configuration, one seeded run per
//! trial, and the artifacts written afterwards.

use std::fmt;
use std::io::{BufWriter, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::generators::{gen_parallelogram, gen_random_connected, random_orientations};
use super::stats::{Summary, TrialRecord};
use super::svg::render_round;
use super::trace::write_trace;
use crate::alignment::{AlignMachine, AlignMode, Alignment};
use crate::engine::{io::parse_structure, Protocol, RoundTrace, RunResult, Simulation, Structure};
use crate::error::{Error, Result};
use crate::exec::ExecMode;
use crate::grid::GridCoord;
use crate::leader_consensus::{Consensus, ConsensusMachine, LeaderElection, LeaderMachine, Verdict};
use crate::parallelogram::{
    detect_linear_ratio, detect_polynomial_ratio, parallelogram_sides, Detection, ParallelogramDetection, PolySpec,
};
use crate::shapes::{is_representation, representation, Shape, Transformation};
use crate::usr::recognize_shape;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolKind {
    Leader,
    Consensus,
    Compass,
    Chirality,
    Pgram,
    PgramLinear,
    PgramPoly,
    Usr,
}

impl ProtocolKind {
    pub const ALL: [ProtocolKind; 8] = [
        ProtocolKind::Leader,
        ProtocolKind::Consensus,
        ProtocolKind::Compass,
        ProtocolKind::Chirality,
        ProtocolKind::Pgram,
        ProtocolKind::PgramLinear,
        ProtocolKind::PgramPoly,
        ProtocolKind::Usr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProtocolKind::Leader => "leader",
            ProtocolKind::Consensus => "consensus",
            ProtocolKind::Compass => "compass",
            ProtocolKind::Chirality => "chirality",
            ProtocolKind::Pgram => "pgram",
            ProtocolKind::PgramLinear => "pgram-linear",
            ProtocolKind::PgramPoly => "pgram-poly",
            ProtocolKind::Usr => "usr",
        }
    }

    /// Protocols made of several simulations record no round traces.
    pub fn traceable(self) -> bool {
        !matches!(self, ProtocolKind::PgramLinear | ProtocolKind::PgramPoly | ProtocolKind::Usr)
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProtocolKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ProtocolKind::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown protocol `{s}`")))
    }
}

/// Everything needed to replay an experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub protocol: ProtocolKind,
    /// Size of random structures.
    pub n: usize,
    /// Parallelogram sides.
    pub h: u32,
    pub l: u32,
    /// Linear ratio `l = a·h + b`.
    pub a: u32,
    pub b: u32,
    /// Polynomial coefficients `c0,c1,…`.
    pub poly: Option<String>,
    /// Target shape, one face `q r U|D` per line.
    pub shape: Option<String>,
    /// Scale of the generated shape representation.
    pub sigma: i32,
    /// Fixed structure in the text format; replaces the generator.
    pub structure: Option<String>,
    pub k_vals: u32,
    pub pins: usize,
    pub kappa: u32,
    pub trials: usize,
    pub seed: u64,
    pub max_rounds: u64,
    pub exec: ExecMode,
    pub trace: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub svg_rounds: Vec<u64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            protocol: ProtocolKind::Leader,
            n: 64,
            h: 3,
            l: 8,
            a: 2,
            b: 2,
            poly: None,
            shape: None,
            sigma: 4,
            structure: None,
            k_vals: 4,
            pins: 2,
            kappa: 3,
            trials: 10,
            seed: 1,
            max_rounds: 1_000_000,
            exec: ExecMode::Parallel,
            trace: None,
            svg: None,
            svg_rounds: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialStats {
    pub config: ExperimentConfig,
    pub summary: Summary,
    pub records: Vec<TrialRecord>,
}

pub struct TrialOutput {
    pub record: TrialRecord,
    pub trace: Option<Vec<RoundTrace>>,
    /// Structure the trial ran on, before the protocol changed it.
    pub structure: Structure,
}

/// Seed of trial `i`; depends on nothing but the master seed and `i`.
pub fn trial_seed(master: u64, i: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(i as u64);
    rng.next_u64()
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.trials == 0 {
            return bad("at least one trial is needed".into());
        }
        if self.n == 0 {
            return bad("n must be positive".into());
        }
        if self.k_vals == 0 {
            return bad("k_vals must be positive".into());
        }
        if matches!(self.protocol, ProtocolKind::Pgram | ProtocolKind::PgramLinear | ProtocolKind::PgramPoly)
            && (self.h == 0 || self.h > self.l)
            && self.structure.is_none()
        {
            return bad(format!("parallelogram sides need 1 ≤ h ≤ l, got h = {}, l = {}", self.h, self.l));
        }
        if self.protocol == ProtocolKind::PgramPoly && self.poly.is_none() {
            return bad("pgram-poly needs --poly".into());
        }
        if self.protocol == ProtocolKind::Usr && self.shape.is_none() {
            return bad("usr needs a shape".into());
        }
        if self.sigma < 1 {
            return bad("sigma must be positive".into());
        }
        Ok(())
    }

    fn shape(&self) -> Result<Shape> {
        Shape::parse(self.shape.as_deref().unwrap_or_default())
    }

    fn wants_trace(&self) -> bool {
        (self.trace.is_some() || self.svg.is_some()) && self.protocol.traceable()
    }

    /// Structure of trial `i`.
    pub fn structure_for(&self, i: usize, seed: u64) -> Result<Structure> {
        if let Some(text) = &self.structure {
            return Ok(parse_structure(text)?.with_seed(seed));
        }
        let coords: Vec<GridCoord> = match self.protocol {
            ProtocolKind::Pgram | ProtocolKind::PgramLinear | ProtocolKind::PgramPoly => {
                gen_parallelogram(self.h, self.l, (i % 6) as u8)
            }
            ProtocolKind::Usr => {
                representation(&self.shape()?, &Transformation::new(GridCoord::ORIGIN, (i % 6) as u8, self.sigma))
            }
            _ => gen_random_connected(self.n, seed),
        };
        let o = random_orientations(coords.len(), seed, self.protocol == ProtocolKind::Chirality, true);
        Structure::new(&coords, &o, self.pins, seed)
    }
}

struct Sim<O> {
    result: RunResult<O>,
    structure: Structure,
    candidates: Vec<u32>,
}

fn simulate<P: Protocol>(
    cfg: &ExperimentConfig,
    s: Structure,
    p: &P,
    states: Option<Vec<P::State>>,
    candidate: Option<fn(&P::State) -> bool>,
) -> Result<Sim<P::Output>> {
    let sim = match states {
        Some(st) => Simulation::with_states(s, p, st),
        None => Simulation::new(s, p),
    };
    let mut sim = sim.record_trace(cfg.wants_trace()).exec_mode(cfg.exec);
    let mut candidates = Vec::new();
    let result = sim.run_observed(cfg.max_rounds, |sim| {
        if let Some(f) = candidate {
            candidates.push(sim.states().iter().filter(|s| f(s)).count() as u32);
        }
    })?;
    Ok(Sim { result, structure: sim.into_structure(), candidates })
}

/// Runs trial `i` of the experiment.
pub fn run_trial(cfg: &ExperimentConfig, i: usize) -> Result<TrialOutput> {
    let seed = trial_seed(cfg.seed, i);
    let s = cfg.structure_for(i, seed)?;
    let initial = s.clone();
    let n = s.len();
    let record = |rounds, terminated, verdict: String, success, candidates| TrialRecord {
        trial: i,
        seed,
        n,
        rounds,
        terminated,
        verdict,
        success,
        candidates,
    };
    let (record, trace) = match cfg.protocol {
        ProtocolKind::Leader => {
            let p = LeaderElection { kappa: cfg.kappa };
            let mut r = simulate(cfg, s, &p, None, Some(|m: &LeaderMachine| m.in_c1))?;
            let leaders = r.result.outputs.iter().filter(|o| **o == Some(Verdict::Leader)).count();
            let ok = r.result.terminated() && leaders == 1;
            let trace = r.result.trace.take();
            (record(r.result.rounds, r.result.terminated(), format!("leaders={leaders}"), ok, r.candidates), trace)
        }
        ProtocolKind::Consensus => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xC0_45E5);
            let inputs: Vec<u32> = (0..n).map(|_| rng.gen_range(1..=cfg.k_vals)).collect();
            let min = inputs.iter().copied().min();
            let states = inputs.iter().map(|v| ConsensusMachine::new(*v, cfg.k_vals)).collect();
            let p = Consensus { k_vals: cfg.k_vals };
            let mut r = simulate(cfg, s, &p, Some(states), None)?;
            let ok = r.result.terminated() && r.result.outputs.iter().all(|o| *o == min);
            let trace = r.result.trace.take();
            let verdict = format!("decided={}", r.result.unanimous().map_or("mixed".into(), |v| v.to_string()));
            (record(r.result.rounds, r.result.terminated(), verdict, ok, vec![]), trace)
        }
        ProtocolKind::Compass | ProtocolKind::Chirality => {
            let mode = if cfg.protocol == ProtocolKind::Compass { AlignMode::Compass } else { AlignMode::Chirality };
            let p = Alignment { mode };
            let mut r = simulate(cfg, s, &p, None, Some(|m: &AlignMachine| m.candidate))?;
            let o = r.structure.orientations();
            let uniform = match mode {
                AlignMode::Compass => o.iter().all(|x| x.offset == o[0].offset),
                AlignMode::Chirality => o.iter().all(|x| x.chirality == o[0].chirality),
            };
            let ok = r.result.terminated() && uniform;
            let trace = r.result.trace.take();
            let verdict = if uniform { "aligned" } else { "not aligned" };
            (record(r.result.rounds, r.result.terminated(), verdict.into(), ok, r.candidates), trace)
        }
        ProtocolKind::Pgram => {
            let expect = parallelogram_sides(s.coords()).is_some();
            let mut r = simulate(cfg, s, &ParallelogramDetection, None, None)?;
            let d = r.result.unanimous();
            let ok = r.result.terminated() && d.map(Detection::accepted) == Some(expect);
            let trace = r.result.trace.take();
            (record(r.result.rounds, r.result.terminated(), format!("{d:?}"), ok, vec![]), trace)
        }
        ProtocolKind::PgramLinear => {
            let expect = parallelogram_sides(s.coords()).is_some_and(|(h, l)| h > 0 && l == cfg.a * h + cfg.b);
            let rep = detect_linear_ratio(s, cfg.a, cfg.b, cfg.kappa, cfg.max_rounds)?;
            let verdict = if rep.accepted { "accept" } else { "reject" };
            (record(rep.rounds.total(), true, verdict.into(), rep.accepted == expect, vec![]), None)
        }
        ProtocolKind::PgramPoly => {
            let spec = PolySpec::parse(cfg.poly.as_deref().unwrap_or_default())?;
            let expect =
                parallelogram_sides(s.coords()).is_some_and(|(h, l)| h > 0 && l as i128 == spec.eval(h as i128));
            let rep = detect_polynomial_ratio(s, &spec, cfg.kappa, cfg.max_rounds)?;
            let verdict = if rep.accepted { "accept" } else { "reject" };
            (record(rep.rounds.total(), true, verdict.into(), rep.accepted == expect, vec![]), None)
        }
        ProtocolKind::Usr => {
            let shape = cfg.shape()?;
            let expect = is_representation(&shape, s.coords());
            let rep = recognize_shape(s, &shape, cfg.max_rounds)?;
            let verdict = format!("{} in phase {}", if rep.accepted { "accept" } else { "reject" }, rep.phase);
            let rounds = rep.rounds + rep.chirality_rounds;
            (record(rounds, true, verdict, rep.accepted == expect, vec![]), None)
        }
    };
    Ok(TrialOutput { record, trace, structure: initial })
}

/// Runs all trials, then writes the trace and SVG artifacts if requested.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<TrialStats> {
    cfg.validate()?;
    let outputs: Vec<Result<TrialOutput>> = cfg.exec.map_range(cfg.trials, |i| run_trial(cfg, i));
    let outputs: Vec<TrialOutput> = outputs.into_iter().collect::<Result<_>>()?;
    for o in &outputs {
        let r = &o.record;
        log::debug!("trial {} (seed {:#x}): {} after {} rounds", r.trial, r.seed, r.verdict, r.rounds);
    }
    if let Some(path) = &cfg.trace {
        let mut out = BufWriter::new(std::fs::File::create(path)?);
        for o in &outputs {
            if let Some(t) = &o.trace {
                write_trace(&mut out, o.record.trial, t)?;
            }
        }
        out.flush()?;
    }
    if let (Some(dir), Some(first)) = (&cfg.svg, outputs.first()) {
        if let Some(trace) = &first.trace {
            std::fs::create_dir_all(dir)?;
            for r in trace.iter().filter(|r| cfg.svg_rounds.contains(&r.round)) {
                std::fs::write(dir.join(format!("round_{:05}.svg", r.round)), render_round(&first.structure, r))?;
            }
        }
    }
    let records: Vec<TrialRecord> = outputs.into_iter().map(|o| o.record).collect();
    Ok(TrialStats { config: cfg.clone(), summary: Summary::from_records(&records), records })
}

pub fn write_stats(path: &std::path::Path, stats: &TrialStats) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(stats)?)?;
    Ok(())
}

pub fn read_stats(path: &std::path::Path) -> Result<TrialStats> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}
