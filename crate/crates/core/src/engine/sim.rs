use std::fmt::Debug;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::ExecMode;
use crate::grid::{Chirality, GridCoord};

use super::circuit::{compute_circuits_with_maps, CircuitPartition, PinConfig};
use super::structure::Structure;
use super::MAX_LOCAL_PINS;

/// Behavior of every amoebot in a protocol.
///
/// Step functions see only local information through [`StepCtx`]; no global
/// identifier is ever passed in.
pub trait Protocol: Sync {
    type State: Clone + Debug + Send + Sync + Serialize;
    type Output: Clone + Debug + PartialEq + Send + Serialize;

    fn init(&self, view: &InitView) -> Self::State;

    fn step(&self, state: &mut Self::State, ctx: &mut StepCtx<'_>);

    /// Final answer of an amoebot, once it has terminated.
    fn output(&self, state: &Self::State) -> Option<Self::Output>;
}

/// What an amoebot knows before round 0.
#[derive(Clone, Copy, Debug)]
pub struct InitView {
    pub pins_per_edge: usize,
    pub neighbors: u8,
}

impl InitView {
    pub fn has_neighbor(&self, d: usize) -> bool {
        self.neighbors & (1 << d) != 0
    }

    pub fn degree(&self) -> usize {
        self.neighbors.count_ones() as usize
    }
}

/// Local view and action buffer of one amoebot for one round.
pub struct StepCtx<'a> {
    round: u64,
    k: usize,
    neighbors: u8,
    received: u64,
    config: PinConfig,
    beeps: u64,
    rotate_cw: u8,
    flip: bool,
    failure: Option<String>,
    rng: &'a mut ChaCha8Rng,
    scripted: Option<bool>,
}

impl<'a> StepCtx<'a> {
    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn pins_per_edge(&self) -> usize {
        self.k
    }

    /// Local pin id of pin `i` on the bond in local direction `dir`.
    pub fn pin(&self, dir: usize, i: usize) -> usize {
        debug_assert!(dir < 6 && i < self.k);
        dir * self.k + i
    }

    pub fn neighbors(&self) -> u8 {
        self.neighbors
    }

    pub fn has_neighbor(&self, dir: usize) -> bool {
        self.neighbors & (1 << (dir % 6)) != 0
    }

    pub fn degree(&self) -> usize {
        self.neighbors.count_ones() as usize
    }

    /// Mask of all local pins on existing bonds.
    pub fn bond_pin_mask(&self) -> u64 {
        (0..6)
            .filter(|d| self.has_neighbor(*d))
            .fold(0u64, |m, d| m | self.bond_mask(d))
    }

    /// Beeps on every bond pin; on the global circuit this reaches everyone.
    pub fn beep_all(&mut self) {
        self.beep_mask(self.bond_pin_mask());
    }

    /// Mask of the pins on the bond in local direction `dir`.
    pub fn bond_mask(&self, dir: usize) -> u64 {
        ((1u64 << self.k) - 1) << (dir * self.k)
    }

    /// True if the circuit through `pin` carried a beep in the previous round.
    pub fn heard(&self, pin: usize) -> bool {
        self.received & (1 << pin) != 0
    }

    pub fn heard_any(&self, mask: u64) -> bool {
        self.received & mask != 0
    }

    pub fn heard_anything(&self) -> bool {
        self.received != 0
    }

    pub fn received(&self) -> u64 {
        self.received
    }

    pub fn config(&self) -> &PinConfig {
        &self.config
    }

    pub fn set_config(&mut self, c: PinConfig) {
        self.config = c;
    }

    pub fn config_mut(&mut self) -> &mut PinConfig {
        &mut self.config
    }

    pub fn clear_config(&mut self) {
        self.config = PinConfig::EMPTY;
    }

    /// Connects every pin of every bond into one class.
    pub fn use_global_config(&mut self) {
        self.config = PinConfig::global(self.k);
    }

    /// Beeps on the class containing `pin` of the configuration installed
    /// this round. Pins without a bond are ignored.
    pub fn beep(&mut self, pin: usize) {
        self.beeps |= 1 << pin;
    }

    pub fn beep_mask(&mut self, mask: u64) {
        self.beeps |= mask;
    }

    /// Fair coin, true meaning HEADS.
    pub fn coin(&mut self) -> bool {
        match self.scripted.take() {
            Some(b) => b,
            None => self.rng.gen(),
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        self.rng
    }

    /// Turns the compass clockwise as the amoebot perceives it; takes effect
    /// after this round's beeps.
    pub fn rotate_compass_cw(&mut self, steps: u8) {
        self.rotate_cw = (self.rotate_cw + steps) % 6;
    }

    /// Mirrors the local labeling; takes effect after this round's beeps.
    pub fn flip_chirality(&mut self) {
        self.flip = !self.flip;
    }

    /// Reports an internal contradiction; the run stops with an error.
    pub fn fail(&mut self, reason: impl Into<String>) {
        self.failure.get_or_insert_with(|| reason.into());
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Terminated,
    MaxRoundsExceeded,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AmoebotTrace {
    pub coord: GridCoord,
    pub received: u64,
    pub sent: u64,
    pub wires: Vec<(u8, u8)>,
    pub memory: serde_json::Value,
}

/// Record of one round.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RoundTrace {
    pub round: u64,
    pub circuits: usize,
    pub beeping_circuits: usize,
    pub amoebots: Vec<AmoebotTrace>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunResult<O> {
    pub rounds: u64,
    pub status: RunStatus,
    /// Output per amoebot, in structure order.
    pub outputs: Vec<Option<O>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<RoundTrace>>,
}

impl<O: PartialEq + Clone> RunResult<O> {
    pub fn terminated(&self) -> bool {
        self.status == RunStatus::Terminated
    }

    /// The common output if every amoebot reports the same one.
    pub fn unanimous(&self) -> Option<O> {
        let first = self.outputs.first()?.clone()?;
        self.outputs
            .iter()
            .all(|o| o.as_ref() == Some(&first))
            .then_some(first)
    }
}

struct Act {
    config: PinConfig,
    beeps: u64,
    rotate_cw: u8,
    flip: bool,
    failure: Option<String>,
}

#[cfg(feature = "parallel")]
fn par_compute<S, F>(states: &mut [S], rngs: &mut [ChaCha8Rng], f: &F) -> Vec<Act>
where
    S: Send,
    F: Fn(usize, &mut S, &mut ChaCha8Rng) -> Act + Sync,
{
    use rayon::prelude::*;
    states
        .par_iter_mut()
        .zip(rngs.par_iter_mut())
        .enumerate()
        .map(|(i, (s, r))| f(i, s, r))
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn par_compute<S, F>(states: &mut [S], rngs: &mut [ChaCha8Rng], f: &F) -> Vec<Act>
where
    F: Fn(usize, &mut S, &mut ChaCha8Rng) -> Act,
{
    states
        .iter_mut()
        .zip(rngs.iter_mut())
        .enumerate()
        .map(|(i, (s, r))| f(i, s, r))
        .collect()
}

/// Coin override for tests: `(round, amoebot index) -> forced coin`.
pub type CoinScript = Box<dyn Fn(u64, usize) -> Option<bool> + Send + Sync>;

/// Amoebot count above which the compute phase is split across threads.
const PARALLEL_COMPUTE_THRESHOLD: usize = 4096;

/// A protocol running on a structure.
pub struct Simulation<'p, P: Protocol> {
    protocol: &'p P,
    structure: Structure,
    states: Vec<P::State>,
    configs: Vec<PinConfig>,
    maps: Vec<[u32; MAX_LOCAL_PINS]>,
    neighbor_masks: Vec<u8>,
    rngs: Vec<ChaCha8Rng>,
    partition: CircuitPartition,
    dirty: bool,
    /// Per physical pin: its circuit carried a beep last round.
    delivered: Vec<bool>,
    round: u64,
    exec: ExecMode,
    coin_script: Option<CoinScript>,
    record: bool,
    trace: Vec<RoundTrace>,
}

fn rng_for(seed: u64, epoch: u64, index: usize) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed ^ epoch.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    r.set_stream(index as u64);
    r
}

impl<'p, P: Protocol> Simulation<'p, P> {
    pub fn new(structure: Structure, protocol: &'p P) -> Self {
        let states = (0..structure.len())
            .map(|i| {
                protocol.init(&InitView {
                    pins_per_edge: structure.pins_per_edge(),
                    neighbors: structure.local_neighbor_mask(i),
                })
            })
            .collect();
        Self::with_states(structure, protocol, states)
    }

    /// Starts from explicit per-amoebot states given in structure order.
    pub fn with_states(mut structure: Structure, protocol: &'p P, states: Vec<P::State>) -> Self {
        assert_eq!(states.len(), structure.len(), "one state per amoebot");
        let n = structure.len();
        let epoch = structure.epoch;
        structure.epoch += 1;
        let maps: Vec<_> = (0..n).map(|i| structure.local_pin_map(i)).collect();
        let neighbor_masks = (0..n).map(|i| structure.local_neighbor_mask(i)).collect();
        let rngs = (0..n).map(|i| rng_for(structure.seed(), epoch, i)).collect();
        let pins = structure.num_physical_pins();
        Simulation {
            protocol,
            states,
            configs: vec![PinConfig::EMPTY; n],
            maps,
            neighbor_masks,
            rngs,
            partition: CircuitPartition {
                block: (0..pins as u32).collect(),
                num_blocks: pins,
            },
            dirty: false,
            delivered: vec![false; pins],
            round: 0,
            exec: ExecMode::default(),
            coin_script: None,
            record: false,
            trace: Vec::new(),
            structure,
        }
    }

    pub fn exec_mode(mut self, mode: ExecMode) -> Self {
        self.exec = mode;
        self
    }

    pub fn coin_script(mut self, script: CoinScript) -> Self {
        self.coin_script = Some(script);
        self
    }

    pub fn record_trace(mut self, on: bool) -> Self {
        self.record = on;
        self
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn structure(&self) -> &Structure {
        &self.structure
    }

    pub fn states(&self) -> &[P::State] {
        &self.states
    }

    pub fn configs(&self) -> &[PinConfig] {
        &self.configs
    }

    pub fn partition(&self) -> &CircuitPartition {
        &self.partition
    }

    /// Hands back the structure, with any orientation changes applied.
    pub fn into_structure(self) -> Structure {
        self.structure
    }

    pub fn into_parts(self) -> (Structure, Vec<P::State>) {
        (self.structure, self.states)
    }

    pub fn outputs(&self) -> Vec<Option<P::Output>> {
        self.states.iter().map(|s| self.protocol.output(s)).collect()
    }

    pub fn all_terminated(&self) -> bool {
        self.states.iter().all(|s| self.protocol.output(s).is_some())
    }

    fn received_mask(&self, i: usize) -> u64 {
        let map = &self.maps[i];
        let mut m = 0u64;
        for (pin, &p) in map.iter().enumerate() {
            if p != u32::MAX && self.delivered[p as usize] {
                m |= 1 << pin;
            }
        }
        m
    }

    /// Executes one look-compute-act round.
    pub fn step_round(&mut self) -> Result<Option<RoundTrace>> {
        let n = self.structure.len();
        let k = self.structure.pins_per_edge();
        let round = self.round;
        let received: Vec<u64> = (0..n).map(|i| self.received_mask(i)).collect();
        let scripted: Vec<Option<bool>> = match &self.coin_script {
            Some(f) => (0..n).map(|i| f(round, i)).collect(),
            None => vec![None; n],
        };

        let protocol = self.protocol;
        let configs = &self.configs;
        let masks = &self.neighbor_masks;
        let compute = |i: usize, state: &mut P::State, rng: &mut ChaCha8Rng| {
            let mut ctx = StepCtx {
                round,
                k,
                neighbors: masks[i],
                received: received[i],
                config: configs[i],
                beeps: 0,
                rotate_cw: 0,
                flip: false,
                failure: None,
                rng,
                scripted: scripted[i],
            };
            protocol.step(state, &mut ctx);
            Act {
                config: ctx.config,
                beeps: ctx.beeps,
                rotate_cw: ctx.rotate_cw,
                flip: ctx.flip,
                failure: ctx.failure,
            }
        };
        let parallel = n >= PARALLEL_COMPUTE_THRESHOLD && self.exec.is_parallel();
        let acts: Vec<Act> = if parallel {
            par_compute(&mut self.states, &mut self.rngs, &compute)
        } else {
            self.states
                .iter_mut()
                .zip(self.rngs.iter_mut())
                .enumerate()
                .map(|(i, (s, r))| compute(i, s, r))
                .collect()
        };

        if let Some(reason) = acts.iter().find_map(|a| a.failure.clone()) {
            return Err(Error::ProtocolPanic { round, reason });
        }

        // ACT: install configurations and send beeps on the new circuits
        for (i, a) in acts.iter().enumerate() {
            if a.config != self.configs[i] {
                self.configs[i] = a.config;
                self.dirty = true;
            }
        }
        if self.dirty {
            self.partition = compute_circuits_with_maps(
                self.structure.num_physical_pins(),
                &self.maps,
                &self.configs,
            );
            self.dirty = false;
        }
        let mut hot = vec![false; self.partition.num_blocks];
        for (i, a) in acts.iter().enumerate() {
            let mut b = a.beeps;
            while b != 0 {
                let pin = b.trailing_zeros() as usize;
                b &= b - 1;
                if let Some(blk) = self.partition.block_of(&self.maps[i], pin) {
                    hot[blk] = true;
                }
            }
        }
        for (p, d) in self.delivered.iter_mut().enumerate() {
            *d = hot[self.partition.block[p] as usize];
        }

        let trace = self.record.then(|| RoundTrace {
            round,
            circuits: self.partition.num_blocks,
            beeping_circuits: hot.iter().filter(|h| **h).count(),
            amoebots: (0..n)
                .map(|i| AmoebotTrace {
                    coord: self.structure.coord(i),
                    received: received[i],
                    sent: acts[i].beeps,
                    wires: self.configs[i].wires(),
                    memory: serde_json::to_value(&self.states[i]).unwrap_or_default(),
                })
                .collect(),
        });

        // orientation changes take effect after delivery
        for (i, a) in acts.iter().enumerate() {
            if a.rotate_cw == 0 && !a.flip {
                continue;
            }
            let o0 = self.structure.orientation(i);
            // clockwise in the amoebot's own sense
            let steps = match o0.chirality {
                Chirality::Ccw => a.rotate_cw,
                Chirality::Cw => (6 - a.rotate_cw) % 6,
            };
            let mut o = o0.rotated_cw(steps);
            if a.flip {
                o = o.flipped();
            }
            let old_map = self.maps[i];
            self.structure.set_orientation(i, o);
            self.maps[i] = self.structure.local_pin_map(i);
            self.neighbor_masks[i] = self.structure.local_neighbor_mask(i);
            if self.maps[i] != old_map && !self.configs[i].is_empty() {
                self.configs[i] = PinConfig::EMPTY;
                self.dirty = true;
            }
        }

        self.round += 1;
        if let Some(t) = &trace {
            self.trace.push(t.clone());
        }
        Ok(trace)
    }

    /// Runs until every amoebot has an output or `max_rounds` rounds elapse.
    pub fn run(&mut self, max_rounds: u64) -> Result<RunResult<P::Output>> {
        self.run_observed(max_rounds, |_| {})
    }

    /// Like [`run`](Self::run), calling `observe` after every round.
    pub fn run_observed<F>(&mut self, max_rounds: u64, mut observe: F) -> Result<RunResult<P::Output>>
    where
        F: FnMut(&Simulation<'p, P>),
    {
        let start = self.round;
        let mut status = RunStatus::MaxRoundsExceeded;
        while self.round - start < max_rounds {
            self.step_round()?;
            observe(self);
            if self.all_terminated() {
                status = RunStatus::Terminated;
                break;
            }
        }
        Ok(RunResult {
            rounds: self.round - start,
            status,
            outputs: self.outputs(),
            trace: self.record.then(|| std::mem::take(&mut self.trace)),
        })
    }
}

/// Convenience: builds a simulation and runs it to completion.
pub fn run<P: Protocol>(
    structure: Structure,
    protocol: &P,
    max_rounds: u64,
) -> Result<(RunResult<P::Output>, Structure)> {
    let mut sim = Simulation::new(structure, protocol);
    let r = sim.run(max_rounds)?;
    Ok((r, sim.into_structure()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Chirality, Orientation};

    /// Installs the global circuit and lets flagged amoebots beep once.
    struct Pulse;

    #[derive(Clone, Debug, Serialize)]
    struct PulseState {
        sender: bool,
        heard: Vec<bool>,
    }

    impl Protocol for Pulse {
        type State = PulseState;
        type Output = Vec<bool>;

        fn init(&self, _: &InitView) -> PulseState {
            PulseState { sender: false, heard: Vec::new() }
        }

        fn step(&self, st: &mut PulseState, ctx: &mut StepCtx<'_>) {
            if ctx.round() > 0 {
                st.heard.push(ctx.heard_anything());
            }
            ctx.use_global_config();
            if ctx.round() == 0 && st.sender {
                ctx.beep(ctx.bond_pin_mask().trailing_zeros() as usize);
            }
        }

        fn output(&self, st: &PulseState) -> Option<Vec<bool>> {
            (st.heard.len() >= 2).then(|| st.heard.clone())
        }
    }

    fn line(n: i32, k: usize) -> Structure {
        let coords: Vec<_> = (0..n).map(|q| GridCoord::new(q, 0)).collect();
        let o: Vec<_> = (0..n)
            .map(|i| {
                let ch = if i % 2 == 0 { Chirality::Ccw } else { Chirality::Cw };
                Orientation::new(ch, (i * 5 % 6) as u8)
            })
            .collect();
        Structure::new(&coords, &o, k, 3).unwrap()
    }

    fn pulse(senders: &[usize]) -> RunResult<Vec<bool>> {
        let s = line(5, 2);
        let mut states: Vec<_> = (0..5).map(|_| Pulse.init(&InitView { pins_per_edge: 2, neighbors: 0 })).collect();
        for &i in senders {
            states[i].sender = true;
        }
        let mut sim = Simulation::with_states(s, &Pulse, states);
        sim.run(10).unwrap()
    }

    #[test]
    fn global_beep_reaches_everyone_next_round() {
        let r = pulse(&[2]);
        assert!(r.terminated());
        for o in &r.outputs {
            assert_eq!(o.as_deref(), Some(&[true, false][..]));
        }
    }

    #[test]
    fn silence_and_multiple_senders() {
        let quiet = pulse(&[]);
        assert!(quiet.outputs.iter().all(|o| o.as_deref() == Some(&[false, false][..])));
        let one = pulse(&[0]);
        let two = pulse(&[0, 4]);
        assert_eq!(one.outputs, two.outputs);
    }

    #[test]
    fn round_cap_reports_non_termination() {
        let mut sim = Simulation::new(line(3, 1), &Pulse);
        let r = sim.run(1).unwrap();
        assert_eq!(r.status, RunStatus::MaxRoundsExceeded);
        assert_eq!(r.rounds, 1);
    }

    /// Every amoebot tosses coins and beeps on random pins with random wiring.
    struct Noise;

    impl Protocol for Noise {
        type State = Vec<u64>;
        type Output = ();

        fn init(&self, _: &InitView) -> Vec<u64> {
            Vec::new()
        }

        fn step(&self, st: &mut Vec<u64>, ctx: &mut StepCtx<'_>) {
            st.push(ctx.received());
            let pins = 6 * ctx.pins_per_edge();
            let mut c = PinConfig::EMPTY;
            for _ in 0..3 {
                let a = ctx.rng().gen_range(0..pins);
                let b = ctx.rng().gen_range(0..pins);
                c.connect(a, b);
            }
            ctx.set_config(c);
            if ctx.coin() {
                let p = ctx.rng().gen_range(0..pins);
                ctx.beep(p);
            }
        }

        fn output(&self, st: &Vec<u64>) -> Option<()> {
            (st.len() >= 8).then_some(())
        }
    }

    #[test]
    fn traces_are_deterministic_and_order_independent() {
        let coords = [
            GridCoord::new(0, 0),
            GridCoord::new(1, 0),
            GridCoord::new(0, 1),
            GridCoord::new(1, 1),
            GridCoord::new(2, 0),
        ];
        let o = [Orientation::CANONICAL; 5];
        let mut rev = coords;
        rev.reverse();
        let run = |cs: &[GridCoord]| {
            let s = Structure::new(cs, &o, 2, 99).unwrap();
            let mut sim = Simulation::new(s, &Noise).record_trace(true);
            let r = sim.run(20).unwrap();
            serde_json::to_string(&r.trace).unwrap()
        };
        assert_eq!(run(&coords), run(&coords));
        assert_eq!(run(&coords), run(&rev));
    }

    #[test]
    fn rotation_clears_configuration() {
        struct Spin;
        impl Protocol for Spin {
            type State = u8;
            type Output = u8;
            fn init(&self, _: &InitView) -> u8 {
                0
            }
            fn step(&self, st: &mut u8, ctx: &mut StepCtx<'_>) {
                if *st == 0 {
                    ctx.use_global_config();
                    ctx.rotate_compass_cw(2);
                } else {
                    assert!(ctx.config().is_empty());
                }
                *st += 1;
            }
            fn output(&self, st: &u8) -> Option<u8> {
                (*st >= 2).then_some(*st)
            }
        }
        let (r, s) = run(line(2, 2), &Spin, 5).unwrap();
        assert!(r.terminated());
        assert_eq!(s.orientation(0).offset, 4);
    }
}
