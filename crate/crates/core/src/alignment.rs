//! Compass alignment and chirality agreement by region fusion.
//!
//! Regions are the connected components of the bonds whose endpoints agree
//! (on the compass, or on the chirality). Each region keeps a candidate set
//! and a regional circuit; per iteration the candidates toss a region coin
//! and every TAILS region next to a non-TAILS region adopts that region's
//! orientation.

use serde::{Deserialize, Serialize};

use crate::engine::{InitView, PinConfig, Protocol, StepCtx};
use crate::primitives::MessageMachine;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlignMode {
    /// Requires a common chirality and at least two pins per bond.
    Compass,
    /// Requires at least two pins per bond.
    Chirality,
}

impl AlignMode {
    fn fusion_rounds(self) -> u8 {
        match self {
            AlignMode::Compass => 5,
            AlignMode::Chirality => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum RegionCoin {
    #[default]
    None,
    Heads,
    Tails,
    Failed,
}

impl RegionCoin {
    fn code(self) -> u64 {
        match self {
            RegionCoin::None => 0,
            RegionCoin::Heads => 1,
            RegionCoin::Tails => 2,
            RegionCoin::Failed => 3,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
enum Phase {
    Start,
    DetectMsg(MessageMachine),
    DetectBeep,
    Check,
    Heads,
    Tails,
    ExchangeMsg(MessageMachine),
    ExchangeBeep,
    Fuse(u8),
    Done,
}

/// Offset toward a neighbor: clockwise 60° turns that map this amoebot's
/// compass onto the neighbor's, given the labels both use for the bond.
pub fn compass_offset(own_label: u8, their_label: u8) -> u8 {
    ((their_label as i32 - own_label as i32 + 3).rem_euclid(6)) as u8
}

#[derive(Clone, Debug, Serialize)]
pub struct AlignMachine {
    mode: AlignMode,
    phase: Phase,
    pub candidate: bool,
    coin: bool,
    pub region_coin: RegionCoin,
    /// Per local direction: offset to the neighbor (0 means same region).
    pub offsets: [u8; 6],
    /// Per local direction: the neighbor's region did not toss TAILS.
    not_tails: u8,
    heard_heads: bool,
    /// Smallest fusion round heard so far.
    fuse_to: Option<u8>,
    sent_last: bool,
    pub iterations: u32,
}

impl AlignMachine {
    pub fn new(mode: AlignMode) -> Self {
        AlignMachine {
            mode,
            phase: Phase::Start,
            candidate: true,
            coin: false,
            region_coin: RegionCoin::None,
            offsets: [0; 6],
            not_tails: 0,
            heard_heads: false,
            fuse_to: None,
            sent_last: false,
            iterations: 0,
        }
    }

    pub fn is_done(&self) -> bool {
        matches!(self.phase, Phase::Done)
    }

    /// True between iterations: the previous iteration has fully settled.
    pub fn at_iteration_start(&self) -> bool {
        matches!(self.phase, Phase::Start | Phase::Done)
    }

    fn same_region_mask(&self, ctx: &StepCtx<'_>) -> u8 {
        (0..6)
            .filter(|d| ctx.has_neighbor(*d) && self.offsets[*d] == 0)
            .fold(0u8, |m, d| m | (1 << d))
    }

    fn region_pins(&self, ctx: &StepCtx<'_>) -> u64 {
        let a = self.same_region_mask(ctx);
        (0..6)
            .filter(|d| a & (1 << d) != 0)
            .fold(0u64, |m, d| m | ctx.bond_mask(d))
    }

    fn install_region_circuit(&self, ctx: &mut StepCtx<'_>) {
        let pins = self.region_pins(ctx);
        let mut cfg = PinConfig::EMPTY;
        cfg.join((0..64).filter(|p| pins & (1 << p) != 0));
        ctx.set_config(cfg);
    }

    /// Beeps on the regional circuit if `on`. A region of one amoebot has
    /// no pins and hears only itself.
    fn region_beep(&mut self, ctx: &mut StepCtx<'_>, on: bool) {
        self.install_region_circuit(ctx);
        let pins = self.region_pins(ctx);
        if on && pins != 0 {
            ctx.beep(pins.trailing_zeros() as usize);
        }
        self.sent_last = on;
    }

    fn region_heard(&self, ctx: &StepCtx<'_>) -> bool {
        self.sent_last || ctx.heard_any(self.region_pins(ctx))
    }

    fn is_boundary(&self, ctx: &StepCtx<'_>) -> bool {
        self.same_region_mask(ctx) != ctx.neighbors()
    }

    fn start_detect(&mut self, ctx: &mut StepCtx<'_>) {
        self.iterations += 1;
        self.sent_last = false;
        ctx.clear_config();
        match self.mode {
            AlignMode::Compass => {
                let k = ctx.pins_per_edge();
                let labels = std::array::from_fn(|d| Some(d as u64));
                let mut m = MessageMachine::new(3, labels, k);
                m.step(ctx);
                self.phase = Phase::DetectMsg(m);
            }
            AlignMode::Chirality => {
                // both endpoints beep their pin 0; the same physical pin is
                // hit iff the chiralities differ
                let k = ctx.pins_per_edge();
                for d in 0..6 {
                    if ctx.has_neighbor(d) {
                        ctx.beep(d * k);
                    }
                }
                self.phase = Phase::DetectBeep;
            }
        }
    }

    fn act_fuse(&mut self, ctx: &mut StepCtx<'_>, i: u8) {
        let member = self.region_coin == RegionCoin::Tails
            && (0..6).any(|d| {
                ctx.has_neighbor(d) && self.offsets[d] == i && self.not_tails & (1 << d) != 0
            });
        self.region_beep(ctx, member);
        self.phase = Phase::Fuse(i);
    }

    /// Advances one round; returns true once the structure is uniform.
    /// All amoebots finish in the same round.
    pub fn step(&mut self, ctx: &mut StepCtx<'_>) -> bool {
        let k = ctx.pins_per_edge();
        match std::mem::replace(&mut self.phase, Phase::Done) {
            Phase::Start => self.start_detect(ctx),
            Phase::DetectMsg(mut m) => {
                if m.step(ctx) {
                    for d in 0..6 {
                        self.offsets[d] = compass_offset(d as u8, m.received_from(d) as u8);
                    }
                    self.act_check(ctx);
                } else {
                    self.phase = Phase::DetectMsg(m);
                }
            }
            Phase::DetectBeep => {
                for d in 0..6 {
                    self.offsets[d] = u8::from(!ctx.heard(d * k + k - 1));
                }
                self.act_check(ctx);
            }
            Phase::Check => {
                if !self.region_heard(ctx) {
                    ctx.clear_config();
                    self.phase = Phase::Done;
                    return true;
                }
                self.coin = self.candidate && ctx.coin();
                let heads = self.candidate && self.coin;
                self.region_beep(ctx, heads);
                self.phase = Phase::Heads;
            }
            Phase::Heads => {
                self.heard_heads = self.region_heard(ctx);
                let tails = self.candidate && !self.coin;
                self.region_beep(ctx, tails);
                self.phase = Phase::Tails;
            }
            Phase::Tails => {
                let heard_tails = self.region_heard(ctx);
                self.region_coin = match (self.heard_heads, heard_tails) {
                    (true, true) => RegionCoin::Failed,
                    (true, false) => RegionCoin::Heads,
                    (false, true) => RegionCoin::Tails,
                    (false, false) => RegionCoin::None,
                };
                if self.region_coin == RegionCoin::Failed && !self.coin {
                    self.candidate = false;
                }
                self.sent_last = false;
                match self.mode {
                    AlignMode::Compass => {
                        let m = MessageMachine::broadcast(2, self.region_coin.code(), k);
                        self.step_exchange(ctx, m);
                    }
                    AlignMode::Chirality => {
                        ctx.clear_config();
                        if self.region_coin != RegionCoin::Tails {
                            ctx.beep_all();
                        }
                        self.phase = Phase::ExchangeBeep;
                    }
                }
            }
            Phase::ExchangeMsg(m) => self.step_exchange(ctx, m),
            Phase::ExchangeBeep => {
                self.not_tails = 0;
                for d in 0..6 {
                    if ctx.has_neighbor(d) && ctx.heard_any(ctx.bond_mask(d)) {
                        self.not_tails |= 1 << d;
                    }
                }
                self.fuse_to = None;
                self.act_fuse(ctx, 1);
            }
            Phase::Fuse(i) => {
                if self.fuse_to.is_none() && self.region_heard(ctx) {
                    self.fuse_to = Some(i);
                }
                if i < self.mode.fusion_rounds() {
                    self.act_fuse(ctx, i + 1);
                } else {
                    self.settle(ctx);
                }
            }
            Phase::Done => {
                self.phase = Phase::Done;
                return true;
            }
        }
        false
    }

    fn act_check(&mut self, ctx: &mut StepCtx<'_>) {
        let boundary = self.is_boundary(ctx);
        self.region_beep(ctx, boundary);
        self.phase = Phase::Check;
    }

    fn step_exchange(&mut self, ctx: &mut StepCtx<'_>, mut m: MessageMachine) {
        if m.step(ctx) {
            self.not_tails = 0;
            for d in 0..6 {
                if ctx.has_neighbor(d) && m.received_from(d) != RegionCoin::Tails.code() {
                    self.not_tails |= 1 << d;
                }
            }
            self.fuse_to = None;
            self.act_fuse(ctx, 1);
        } else {
            self.phase = Phase::ExchangeMsg(m);
        }
    }

    /// Applies the fusion decision; this round is otherwise idle so that
    /// the new orientation is in place before the next detection.
    fn settle(&mut self, ctx: &mut StepCtx<'_>) {
        if self.region_coin == RegionCoin::Tails {
            if let Some(i) = self.fuse_to {
                match self.mode {
                    AlignMode::Compass => ctx.rotate_compass_cw(i),
                    AlignMode::Chirality => ctx.flip_chirality(),
                }
                self.candidate = false;
            }
        }
        ctx.clear_config();
        self.sent_last = false;
        self.phase = Phase::Start;
    }
}

pub struct Alignment {
    pub mode: AlignMode,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct AlignOutcome {
    pub candidate: bool,
    pub iterations: u32,
}

impl Protocol for Alignment {
    type State = AlignMachine;
    type Output = AlignOutcome;

    fn init(&self, _: &InitView) -> AlignMachine {
        AlignMachine::new(self.mode)
    }

    fn step(&self, st: &mut AlignMachine, ctx: &mut StepCtx<'_>) {
        st.step(ctx);
    }

    fn output(&self, st: &AlignMachine) -> Option<AlignOutcome> {
        st.is_done().then_some(AlignOutcome { candidate: st.candidate, iterations: st.iterations })
    }
}
