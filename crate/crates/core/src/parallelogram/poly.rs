//! Polynomial side ratio `l = p(h)`.
//!
//! After positioning, the amoebots learn their distance to the southern side
//! up to the threshold. A small height is settled by walking a token `p(h)`
//! steps along the northern side. Otherwise an add tree along the western
//! side gives `h` modulo the table period at the robot, triangle circuits
//! mark the multiples of `h − j` on the northern side for both halves of
//! `[0, 2l]`, and the pebble jumps between multiples of `lcm_i(h)`, stage by
//! stage, `|a_i·g_i(h)|` times each.

use serde::Serialize;

use super::polyspec::PolySpec;
use super::robot::{beep_bond, heard_bond, Frame, Positioning, N, NE, NW, S, SE, SW};
use crate::engine::{InitView, PinConfig, Protocol, StepCtx};
use crate::primitives::{connect_bonds, AddTreeMachine, ChainRole};

pub struct PolynomialRatio {
    pub spec: PolySpec,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
enum Phase {
    Dist(u32),
    Mode,
    WalkGo,
    WalkHop,
    Tree,
    /// Triangle circuits for `h − j`; sub-round 0, 1 or 2.
    Marks(u32, u8),
    /// Stage `i`, slot, sub-round 0..4.
    Move(u32, u64, u8),
    Verdict(u8),
    Done,
}

#[derive(Clone, Debug, Serialize)]
pub struct PolyState {
    pos: Positioning,
    phase: Phase,
    /// What the previous round did.
    last: Option<Phase>,
    robot: bool,
    failed: bool,
    sent: bool,
    dist: Option<u32>,
    shortcut: bool,
    // shortcut walk
    token: bool,
    walked: i128,
    go: bool,
    // add tree and robot arithmetic
    tree: Option<AddTreeMachine>,
    steps: Vec<u64>,
    // multiples of h − j on the northern side, per half of [0, 2l]
    marks: [u8; 2],
    wrap: bool,
    relay: bool,
    relayed_at_corner: bool,
    // pebble half, if held here
    pebble: Option<u8>,
    pending_wrap: bool,
    objection: bool,
    verdict: Option<bool>,
}

impl PolyState {
    pub fn new(robot: bool) -> Self {
        PolyState {
            pos: Positioning::new(robot),
            phase: Phase::Dist(0),
            last: None,
            robot: false,
            failed: false,
            sent: false,
            dist: None,
            shortcut: false,
            token: false,
            walked: 0,
            go: false,
            tree: None,
            steps: Vec::new(),
            marks: [0; 2],
            wrap: false,
            relay: false,
            relayed_at_corner: false,
            pebble: None,
            pending_wrap: false,
            objection: false,
            verdict: None,
        }
    }
}

impl PolynomialRatio {
    fn d(&self) -> u32 {
        self.spec.degree() as u32
    }

    fn threshold(&self) -> u32 {
        self.spec.threshold as u32
    }

    /// Slots reserved for stage `i`.
    fn slots(&self, i: u32) -> u64 {
        self.spec.falling[i as usize].unsigned_abs() * self.spec.g_max(i as usize)
    }

    /// First move phase at or below stage `i`, or the verdict.
    fn move_from(&self, i: i64) -> Phase {
        (0..=i)
            .rev()
            .find(|i| self.slots(*i as u32) > 0)
            .map(|i| Phase::Move(i as u32, 0, 0))
            .unwrap_or(Phase::Verdict(0))
    }

    fn after_tree(&self) -> Phase {
        if self.d() > 0 {
            Phase::Marks(0, 0)
        } else {
            self.move_from(0)
        }
    }

    fn next(&self, p: Phase) -> Phase {
        let d = self.d();
        match p {
            Phase::Dist(s) if s < self.threshold() => Phase::Dist(s + 1),
            Phase::Dist(_) => Phase::Mode,
            Phase::Marks(j, sub) if sub < 2 => Phase::Marks(j, sub + 1),
            Phase::Marks(j, _) if j + 1 < d => Phase::Marks(j + 1, 0),
            Phase::Marks(..) => self.move_from(d as i64),
            Phase::Move(i, slot, sub) if sub < 3 => Phase::Move(i, slot, sub + 1),
            Phase::Move(i, slot, _) if slot + 1 < self.slots(i) => Phase::Move(i, slot + 1, 0),
            Phase::Move(i, ..) => self.move_from(i as i64 - 1),
            Phase::Verdict(0) => Phase::Verdict(1),
            Phase::Verdict(_) => Phase::Done,
            other => other,
        }
    }

    fn direction(&self, i: u32) -> usize {
        if self.spec.falling[i as usize] > 0 {
            NE
        } else {
            SW
        }
    }
}

fn con(cfg: &mut PinConfig, ctx: &StepCtx<'_>, f: Frame, a: usize, b: usize) {
    if f.has(ctx, a) && f.has(ctx, b) {
        connect_bonds(cfg, ctx.pins_per_edge(), f.local(a), f.local(b));
    }
}

/// Triangles of side `h − j` spanning down to distance `j`, plus the rows.
fn triangle_config(ctx: &StepCtx<'_>, f: Frame, dist: Option<u32>, j: u32) -> PinConfig {
    let mut cfg = PinConfig::EMPTY;
    if f.north(ctx) {
        con(&mut cfg, ctx, f, SE, S);
    } else if dist.is_none_or(|x| x > j) {
        con(&mut cfg, ctx, f, NW, SE);
        con(&mut cfg, ctx, f, N, S);
    } else if dist == Some(j) {
        con(&mut cfg, ctx, f, NW, N);
    }
    con(&mut cfg, ctx, f, NE, SW);
    cfg
}

/// Pin of `lane` on the bond in canonical direction `c` (`NE` or `SW`).
fn lane_pin(ctx: &StepCtx<'_>, f: Frame, c: usize, lane: usize) -> usize {
    let k = ctx.pins_per_edge();
    f.local(c) * k + if c == NE { lane } else { k - 1 - lane }
}

impl PolynomialRatio {
    fn marked(&self, st: &PolyState, i: u32, half: usize) -> bool {
        let mask = ((1u16 << i) - 1) as u8;
        st.marks[half] & mask == mask
    }

    /// Northern row on lanes 0 and 1, cut at the marks of the matching half
    /// and at the pebble.
    fn split_rows(&self, st: &PolyState, ctx: &StepCtx<'_>, f: Frame, i: u32, holder: bool) -> PinConfig {
        let mut cfg = PinConfig::EMPTY;
        if f.north(ctx) && f.has(ctx, NE) && f.has(ctx, SW) && !holder {
            for half in 0..2 {
                if !self.marked(st, i, half) {
                    cfg.connect(lane_pin(ctx, f, NE, half), lane_pin(ctx, f, SW, half));
                }
            }
        }
        cfg
    }

    /// Reads a pebble jump; `wrap_ok` allows crossing `l` into the other half.
    fn read_jump(&self, st: &mut PolyState, ctx: &StepCtx<'_>, f: Frame, i: u32, wrap_ok: bool) {
        if st.sent || !f.north(ctx) {
            return;
        }
        let dir = self.direction(i);
        let back = (dir + 3) % 6;
        if !f.has(ctx, back) {
            return;
        }
        for half in 0..2usize {
            if !ctx.heard(lane_pin(ctx, f, back, half)) {
                continue;
            }
            if self.marked(st, i, half) {
                st.pebble = Some(half as u8);
            } else if !f.has(ctx, dir) {
                let crossing = (dir == NE && half == 0) || (dir == SW && half == 1);
                if crossing && wrap_ok {
                    st.pending_wrap = true;
                } else {
                    st.failed = true;
                }
            }
        }
    }

    fn act(&self, st: &mut PolyState, ctx: &mut StepCtx<'_>, f: Frame) {
        let phase = st.phase;
        match phase {
            Phase::Dist(s) => {
                ctx.clear_config();
                if s == 0 && f.south(ctx) {
                    st.dist = Some(0);
                }
                if st.dist == Some(s) && f.has(ctx, N) {
                    beep_bond(ctx, f.local(N));
                }
            }
            Phase::Mode => {
                ctx.use_global_config();
                if st.robot && st.dist.is_some_and(|h| h <= self.threshold()) {
                    ctx.beep_all();
                }
            }
            Phase::WalkGo => {
                ctx.use_global_config();
                if st.robot && st.walked < self.walk_target(st) {
                    st.walked += 1;
                    ctx.beep_all();
                }
            }
            Phase::WalkHop => {
                ctx.clear_config();
                if st.token {
                    if f.has(ctx, NE) {
                        beep_bond(ctx, f.local(NE));
                        st.token = false;
                        st.sent = true;
                    } else {
                        st.failed = true;
                    }
                }
            }
            Phase::Marks(j, sub) => {
                ctx.set_config(triangle_config(ctx, f, st.dist, j));
                match sub {
                    0 if f.north(ctx) && f.west(ctx) => beep_bond(ctx, f.local(SE)),
                    1 if st.wrap => beep_bond(ctx, f.local(SW)),
                    2 if st.relay && f.has(ctx, SE) => {
                        beep_bond(ctx, f.local(SE));
                        st.relayed_at_corner = f.north(ctx);
                    }
                    _ => {}
                }
                st.wrap = false;
                st.relay = false;
            }
            Phase::Move(i, slot, sub) => self.act_move(st, ctx, f, i, slot, sub),
            Phase::Verdict(0) => {
                ctx.use_global_config();
                if st.failed {
                    ctx.beep_all();
                }
            }
            Phase::Verdict(_) => {
                ctx.use_global_config();
                let at_l = match st.pebble {
                    Some(0) => f.east(ctx),
                    Some(_) => f.west(ctx),
                    None => false,
                };
                if (at_l && f.north(ctx)) || (st.token && f.north(ctx) && f.east(ctx)) {
                    ctx.beep_all();
                }
            }
            Phase::Tree | Phase::Done => unreachable!(),
        }
    }

    fn act_move(&self, st: &mut PolyState, ctx: &mut StepCtx<'_>, f: Frame, i: u32, slot: u64, sub: u8) {
        let dir = self.direction(i);
        match sub {
            0 => {
                ctx.use_global_config();
                if st.robot && slot < st.steps[i as usize] {
                    ctx.beep_all();
                }
            }
            _ if !st.go => ctx.clear_config(),
            1 | 3 => {
                let start = if sub == 1 { st.pebble.map(|h| h as usize) } else { self.wrap_target(st) };
                ctx.set_config(self.split_rows(st, ctx, f, i, start.is_some()));
                let Some(half) = start else { return };
                st.pending_wrap = false;
                if f.has(ctx, dir) {
                    ctx.beep(lane_pin(ctx, f, dir, half));
                    st.pebble = None;
                    st.sent = true;
                } else if sub == 1 && ((dir == NE && half == 0) || (dir == SW && half == 1)) {
                    st.pebble = None;
                    st.pending_wrap = true;
                } else {
                    st.failed = true;
                }
            }
            _ => {
                let mut cfg = PinConfig::EMPTY;
                con(&mut cfg, ctx, f, NE, SW);
                ctx.set_config(cfg);
                if st.pending_wrap {
                    beep_bond(ctx, f.local((dir + 3) % 6));
                    st.pending_wrap = false;
                    st.sent = true;
                }
            }
        }
    }

    /// Half entered by a wrap arriving at this corner, if any.
    fn wrap_target(&self, st: &PolyState) -> Option<usize> {
        st.pending_wrap.then_some(if st.relayed_at_corner { 1 } else { 0 })
    }

    fn read(&self, st: &mut PolyState, ctx: &StepCtx<'_>, f: Frame) {
        let Some(last) = st.last else { return };
        match last {
            Phase::Dist(s) => {
                if st.dist.is_none() && heard_bond(ctx, f.local(S)) {
                    st.dist = Some(s + 1);
                }
            }
            Phase::Mode => st.shortcut = ctx.heard_anything(),
            Phase::WalkGo => st.go = ctx.heard_anything(),
            Phase::WalkHop => {
                if !st.sent && heard_bond(ctx, f.local(SW)) {
                    st.token = true;
                }
            }
            Phase::Marks(j, 0) => {
                let north = f.north(ctx);
                if north && (f.west(ctx) || heard_bond(ctx, f.local(S)) || heard_bond(ctx, f.local(SE))) {
                    st.marks[0] |= 1 << j;
                }
                st.wrap = f.east(ctx)
                    && if north {
                        heard_bond(ctx, f.local(S))
                    } else {
                        heard_bond(ctx, f.local(NW)) && st.dist != Some(j)
                    };
            }
            Phase::Marks(_, 1) => st.relay = f.west(ctx) && heard_bond(ctx, f.local(NE)),
            Phase::Marks(j, _) => {
                if f.north(ctx) {
                    let hit = if f.west(ctx) {
                        st.relayed_at_corner
                    } else {
                        heard_bond(ctx, f.local(S)) || heard_bond(ctx, f.local(SE))
                    };
                    if hit {
                        st.marks[1] |= 1 << j;
                    }
                }
                st.relayed_at_corner = false;
            }
            Phase::Move(i, _, sub) => match sub {
                0 => st.go = ctx.heard_anything(),
                _ if !st.go => {}
                1 => self.read_jump(st, ctx, f, i, true),
                2 => {
                    // the opposite corner picks up a wrap
                    let dir = self.direction(i);
                    let corner = !f.has(ctx, (dir + 3) % 6);
                    if !st.sent && f.north(ctx) && corner && heard_bond(ctx, f.local(dir)) {
                        st.pending_wrap = true;
                        st.relayed_at_corner = dir == NE;
                    }
                }
                _ => self.read_jump(st, ctx, f, i, false),
            },
            Phase::Verdict(0) => st.objection = ctx.heard_anything(),
            Phase::Verdict(_) => st.verdict = Some(!st.objection && ctx.heard_anything()),
            Phase::Tree | Phase::Done => {}
        }
    }

    fn walk_target(&self, st: &PolyState) -> i128 {
        st.dist.map_or(0, |h| self.spec.eval(h as i128).max(0))
    }

    /// Robot arithmetic once `h mod period` is known.
    fn plan_steps(&self, st: &mut PolyState, residue: u64) {
        st.steps = (0..=self.spec.degree())
            .map(|i| self.spec.falling[i].unsigned_abs() * self.spec.g_from_residue(i, residue))
            .collect();
    }

    fn tree_machine(&self, ctx: &StepCtx<'_>, f: Frame) -> AddTreeMachine {
        let m = self.spec.residue_modulus() as u32;
        if !f.west(ctx) {
            return AddTreeMachine::new(None, 0, m);
        }
        let pred = f.has(ctx, N).then(|| f.local(N) as u8);
        let succ = f.has(ctx, S).then(|| f.local(S) as u8);
        AddTreeMachine::new(Some(ChainRole { pred, succ }), pred.is_some() as u32, m)
    }
}

impl Protocol for PolynomialRatio {
    type State = PolyState;
    type Output = bool;

    fn init(&self, _: &InitView) -> PolyState {
        PolyState::new(false)
    }

    fn step(&self, st: &mut PolyState, ctx: &mut StepCtx<'_>) {
        if st.verdict.is_some() {
            return;
        }
        if !st.pos.step(ctx) {
            return;
        }
        let f = st.pos.frame.unwrap();
        if st.last.is_none() && st.phase == Phase::Dist(0) {
            st.robot = st.pos.robot;
        }
        self.read(st, ctx, f);
        st.sent = false;
        if st.verdict.is_some() {
            ctx.clear_config();
            return;
        }
        // phase transitions that depend on what was just read
        match st.last {
            Some(Phase::Mode) => {
                if st.shortcut {
                    st.token = st.robot;
                    if st.robot && self.walk_target(st) < st.dist.unwrap() as i128 {
                        st.failed = true;
                    }
                    st.phase = Phase::WalkGo;
                } else {
                    st.pebble = st.robot.then_some(0);
                    st.phase = if self.spec.residue_modulus() >= 2 { Phase::Tree } else { self.after_tree() };
                    if st.robot && st.phase != Phase::Tree {
                        self.plan_steps(st, 0);
                    }
                }
            }
            Some(Phase::WalkGo) => st.phase = if st.go { Phase::WalkHop } else { Phase::Verdict(0) },
            Some(Phase::WalkHop) => st.phase = Phase::WalkGo,
            Some(p) => st.phase = self.next(p),
            None => {}
        }
        if st.phase == Phase::Tree {
            let tree = st.tree.get_or_insert_with(|| self.tree_machine(ctx, f));
            if !tree.step(ctx) {
                st.last = Some(Phase::Tree);
                return;
            }
            if st.robot {
                let residue = tree.head_sum().unwrap_or(0) as u64;
                self.plan_steps(st, residue);
            }
            st.tree = None;
            st.phase = self.after_tree();
        }
        self.act(st, ctx, f);
        st.last = Some(st.phase);
    }

    fn output(&self, st: &PolyState) -> Option<bool> {
        st.verdict
    }
}
