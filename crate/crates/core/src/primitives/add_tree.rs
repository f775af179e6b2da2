//! Binary add tree and binary search structure on a chain of amoebots.
//!
//! Both assume a common chirality and at least two pins per bond. Lane `j`
//! of a chain bond is local pin `j` on the successor side and local pin
//! `k - 1 - j` on the predecessor side, so both endpoints name it alike.

use serde::Serialize;

use crate::engine::{InitView, PinConfig, Protocol, StepCtx, Structure};
use crate::error::{Error, Result};
use crate::grid::GridCoord;

/// Position of an amoebot in a chain, in local directions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ChainRole {
    pub pred: Option<u8>,
    pub succ: Option<u8>,
}

impl ChainRole {
    pub fn is_head(&self) -> bool {
        self.pred.is_none()
    }

    pub fn succ_lane(&self, k: usize, lane: usize) -> Option<usize> {
        self.succ.map(|d| d as usize * k + lane)
    }

    pub fn pred_lane(&self, k: usize, lane: usize) -> Option<usize> {
        self.pred.map(|d| d as usize * k + (k - 1 - lane))
    }

    /// Connects lane `a` on the predecessor side to lane `b` on the
    /// successor side.
    fn link(&self, cfg: &mut PinConfig, k: usize, a: usize, b: usize) {
        if let (Some(p), Some(s)) = (self.pred_lane(k, a), self.succ_lane(k, b)) {
            cfg.connect(p, s);
        }
    }

    fn parallel(&self, cfg: &mut PinConfig, k: usize) {
        self.link(cfg, k, 0, 0);
        self.link(cfg, k, 1, 1);
    }

    fn crossed(&self, cfg: &mut PinConfig, k: usize) {
        self.link(cfg, k, 0, 1);
        self.link(cfg, k, 1, 0);
    }
}

/// Chain roles for `path` (head first), indexed in structure order.
pub fn chain_roles(s: &Structure, path: &[GridCoord]) -> Result<Vec<Option<ChainRole>>> {
    let mut roles = vec![None; s.len()];
    for (pos, c) in path.iter().enumerate() {
        let i = s
            .position(*c)
            .ok_or_else(|| Error::ChainBroken(format!("{c} is not in the structure")))?;
        if roles[i].is_some() {
            return Err(Error::ChainBroken(format!("{c} appears twice")));
        }
        let o = s.orientation(i);
        let dir_to = |other: GridCoord| -> Result<u8> {
            (other - *c)
                .as_direction()
                .map(|g| o.global_to_local(g).index() as u8)
                .ok_or_else(|| Error::ChainBroken(format!("{c} and {other} are not adjacent")))
        };
        let pred = if pos > 0 { Some(dir_to(path[pos - 1])?) } else { None };
        let succ = if pos + 1 < path.len() { Some(dir_to(path[pos + 1])?) } else { None };
        roles[i] = Some(ChainRole { pred, succ });
    }
    Ok(roles)
}

/// Sums chain values modulo `modulus` at the head.
///
/// One iteration: a crossing round that halves the active set, `modulus - 1`
/// value-indexed report rounds, and a check round on the global circuit.
#[derive(Clone, Debug, Serialize)]
pub struct AddTreeMachine {
    role: Option<ChainRole>,
    modulus: u32,
    acc: u32,
    member: bool,
    reporter: bool,
    s: u32,
    pub iterations: u32,
    done: bool,
}

impl AddTreeMachine {
    pub fn new(role: Option<ChainRole>, value: u32, modulus: u32) -> Self {
        assert!(modulus >= 1);
        AddTreeMachine {
            role,
            modulus,
            acc: value % modulus,
            member: role.is_some(),
            reporter: false,
            s: 0,
            iterations: 0,
            done: false,
        }
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    /// The sum, held by the head once done.
    pub fn head_sum(&self) -> Option<u32> {
        (self.done && self.role.is_some_and(|r| r.is_head())).then_some(self.acc)
    }

    fn observe_membership(&mut self, ctx: &StepCtx<'_>) {
        let k = ctx.pins_per_edge();
        if let Some(r) = self.role {
            if self.member && !r.is_head() {
                let stay = r.pred_lane(k, 1).is_some_and(|p| ctx.heard(p));
                if !stay {
                    self.member = false;
                    self.reporter = true;
                }
            }
        }
    }

    fn observe_report(&mut self, ctx: &StepCtx<'_>, x: u32) {
        let k = ctx.pins_per_edge();
        if let Some(r) = self.role {
            if self.member && r.succ_lane(k, 0).is_some_and(|p| ctx.heard(p)) {
                self.acc = (self.acc + x) % self.modulus;
            }
        }
    }

    pub fn step(&mut self, ctx: &mut StepCtx<'_>) -> bool {
        if self.done {
            return true;
        }
        let k = ctx.pins_per_edge();
        let nb = self.modulus - 1;
        let mut cfg = PinConfig::EMPTY;
        if self.s == 0 {
            if self.iterations > 0 && !ctx.heard_anything() {
                self.done = true;
                ctx.clear_config();
                return true;
            }
            self.iterations += 1;
            if let Some(r) = self.role {
                if r.is_head() {
                    if let Some(p) = r.succ_lane(k, 0) {
                        ctx.beep(p);
                    }
                } else if self.member {
                    r.crossed(&mut cfg, k);
                } else {
                    r.parallel(&mut cfg, k);
                }
            }
            ctx.set_config(cfg);
            self.s = 1;
            return false;
        }
        if self.s == 1 {
            self.observe_membership(ctx);
        } else {
            self.observe_report(ctx, self.s - 1);
        }
        if self.s <= nb {
            let x = self.s;
            if let Some(r) = self.role {
                if !self.member {
                    r.link(&mut cfg, k, 0, 0);
                }
                if self.reporter && self.acc == x {
                    if let Some(p) = r.pred_lane(k, 0) {
                        ctx.beep(p);
                    }
                }
            }
            ctx.set_config(cfg);
            self.s += 1;
        } else {
            if self.reporter {
                self.reporter = false;
                self.acc = 0;
            }
            ctx.use_global_config();
            if self.member && self.role.is_some_and(|r| !r.is_head()) {
                ctx.beep_mask(ctx.bond_pin_mask());
            }
            self.s = 0;
        }
        false
    }
}

pub struct BinaryAddTree {
    pub modulus: u32,
}

impl Protocol for BinaryAddTree {
    type State = AddTreeMachine;
    type Output = Option<u32>;

    fn init(&self, _: &InitView) -> AddTreeMachine {
        AddTreeMachine::new(None, 0, self.modulus)
    }

    fn step(&self, st: &mut AddTreeMachine, ctx: &mut StepCtx<'_>) {
        st.step(ctx);
    }

    fn output(&self, st: &AddTreeMachine) -> Option<Option<u32>> {
        st.is_done().then(|| st.head_sum())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SearchOutcome {
    /// Whether this amoebot holds the requested rank.
    Found(bool),
    RankOutOfRange,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
enum SearchPhase {
    FindFirst,
    Levels(u8),
    Jump(u8),
    Check(u8),
    Done,
}

/// Builds halving levels over the marked chain members, then moves a
/// pointer from the first marked member forward by `target` marked members.
#[derive(Clone, Debug, Serialize)]
pub struct SearchMachine {
    role: Option<ChainRole>,
    marked: bool,
    target: u64,
    levels_needed: u8,
    /// Bit `j` set iff this amoebot is in level `j`.
    levels: u32,
    first: bool,
    pointer: bool,
    phase: SearchPhase,
    outcome: Option<SearchOutcome>,
}

impl SearchMachine {
    pub fn new(role: Option<ChainRole>, marked: bool, target: u64, levels: u8) -> Self {
        SearchMachine {
            role,
            marked: role.is_some() && marked,
            target,
            levels_needed: levels,
            levels: if role.is_some() && marked { 1 } else { 0 },
            first: false,
            pointer: false,
            phase: SearchPhase::FindFirst,
            outcome: None,
        }
    }

    pub fn outcome(&self) -> Option<SearchOutcome> {
        self.outcome
    }

    fn in_level(&self, j: u8) -> bool {
        self.levels & (1 << j) != 0
    }

    /// Next set bit of the target at or below `j`.
    fn next_jump(&self, j: i32) -> Option<u8> {
        (0..=j).rev().find(|b| (self.target >> b) & 1 == 1).map(|b| b as u8)
    }

    fn start_search(&mut self, ctx: &mut StepCtx<'_>) {
        // a check round first, so that an empty marked set is detected
        self.pointer = self.first;
        ctx.use_global_config();
        if self.pointer {
            ctx.beep_mask(ctx.bond_pin_mask());
        }
        self.phase = SearchPhase::Check(self.levels_needed + 1);
    }

    fn jump(&mut self, ctx: &mut StepCtx<'_>, j: u8) {
        let k = ctx.pins_per_edge();
        let mut cfg = PinConfig::EMPTY;
        if let Some(r) = self.role {
            if !self.in_level(j) {
                r.link(&mut cfg, k, 0, 0);
            }
            if self.pointer {
                if let Some(p) = r.succ_lane(k, 0) {
                    ctx.beep(p);
                }
                self.pointer = false;
            }
        }
        ctx.set_config(cfg);
        self.phase = SearchPhase::Jump(j);
    }

    fn finish(&mut self, ctx: &mut StepCtx<'_>, out_of_range: bool) {
        ctx.clear_config();
        self.outcome = Some(if out_of_range {
            SearchOutcome::RankOutOfRange
        } else {
            SearchOutcome::Found(self.pointer)
        });
        self.phase = SearchPhase::Done;
    }

    pub fn step(&mut self, ctx: &mut StepCtx<'_>) -> bool {
        let k = ctx.pins_per_edge();
        match self.phase {
            SearchPhase::FindFirst => {
                let mut cfg = PinConfig::EMPTY;
                if let Some(r) = self.role {
                    if !self.marked {
                        r.link(&mut cfg, k, 0, 0);
                    }
                    if r.is_head() {
                        if self.marked {
                            self.first = true;
                        } else if let Some(p) = r.succ_lane(k, 0) {
                            ctx.beep(p);
                        }
                    }
                }
                ctx.set_config(cfg);
                self.phase = SearchPhase::Levels(0);
            }
            SearchPhase::Levels(j) => {
                let mut cfg = PinConfig::EMPTY;
                if let Some(r) = self.role {
                    if j == 0 {
                        if self.marked && !r.is_head() && r.pred_lane(k, 0).is_some_and(|p| ctx.heard(p)) {
                            self.first = true;
                        }
                    } else if self.in_level(j - 1) {
                        // membership in level j from the crossing round
                        if self.first || r.pred_lane(k, 1).is_some_and(|p| ctx.heard(p)) {
                            self.levels |= 1 << j;
                        }
                    }
                    if j < self.levels_needed {
                        if self.first {
                            if let Some(p) = r.succ_lane(k, 0) {
                                ctx.beep(p);
                            }
                        } else if self.in_level(j) {
                            r.crossed(&mut cfg, k);
                        } else {
                            r.parallel(&mut cfg, k);
                        }
                    }
                }
                if j < self.levels_needed {
                    ctx.set_config(cfg);
                    self.phase = SearchPhase::Levels(j + 1);
                } else {
                    self.start_search(ctx);
                }
            }
            SearchPhase::Jump(j) => {
                if let Some(r) = self.role {
                    if self.in_level(j) && r.pred_lane(k, 0).is_some_and(|p| ctx.heard(p)) {
                        self.pointer = true;
                    }
                }
                ctx.use_global_config();
                if self.pointer {
                    ctx.beep_mask(ctx.bond_pin_mask());
                }
                self.phase = SearchPhase::Check(j);
            }
            SearchPhase::Check(j) => {
                if !ctx.heard_anything() {
                    self.finish(ctx, true);
                } else {
                    match self.next_jump(j as i32 - 1) {
                        Some(next) => self.jump(ctx, next),
                        None => self.finish(ctx, false),
                    }
                }
            }
            SearchPhase::Done => {}
        }
        self.phase == SearchPhase::Done
    }
}

pub struct BinarySearch;

impl Protocol for BinarySearch {
    type State = SearchMachine;
    type Output = SearchOutcome;

    fn init(&self, _: &InitView) -> SearchMachine {
        SearchMachine::new(None, false, 0, 0)
    }

    fn step(&self, st: &mut SearchMachine, ctx: &mut StepCtx<'_>) {
        st.step(ctx);
    }

    fn output(&self, st: &SearchMachine) -> Option<SearchOutcome> {
        st.outcome()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Simulation;
    use crate::grid::{Chirality, Orientation};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// A serpentine chain through full rows, so that some amoebots are off
    /// the chain.
    fn snake(n: usize, offsets: &[u8], ch: Chirality) -> (Structure, Vec<GridCoord>) {
        let width = 9i32;
        let mut path = Vec::new();
        let mut row = 0;
        while path.len() < n {
            let r = 2 * row;
            let cols: Vec<i32> = if row % 2 == 0 { (0..width).collect() } else { (0..width).rev().collect() };
            for q in cols {
                if path.len() < n {
                    path.push(GridCoord::new(q, r));
                }
            }
            if path.len() < n {
                let last = *path.last().unwrap();
                path.push(GridCoord::new(last.q, r + 1));
            }
            row += 1;
        }
        let max_r = path.iter().map(|c| c.r).max().unwrap();
        let coords: Vec<GridCoord> = (0..=max_r)
            .flat_map(|r| (0..width).map(move |q| GridCoord::new(q, r)))
            .collect();
        let o: Vec<Orientation> = (0..coords.len())
            .map(|i| Orientation::new(ch, offsets[i % offsets.len()]))
            .collect();
        (Structure::new(&coords, &o, 2, 0).unwrap(), path)
    }

    fn add_tree(n: usize, values: &[u32], m: u32, seed: u64) -> (Option<u32>, u32) {
        let ch = if seed % 2 == 0 { Chirality::Ccw } else { Chirality::Cw };
        let (s, path) = snake(n, &[0, 3, 1, 5, 2, 4], ch);
        let roles = chain_roles(&s, &path).unwrap();
        let states: Vec<AddTreeMachine> = (0..s.len())
            .map(|i| {
                let v = path
                    .iter()
                    .position(|c| *c == s.coord(i))
                    .map(|p| values[p])
                    .unwrap_or(0);
                AddTreeMachine::new(roles[i], v, m)
            })
            .collect();
        let p = BinaryAddTree { modulus: m };
        let mut sim = Simulation::with_states(s, &p, states);
        let r = sim.run(100_000).unwrap();
        assert!(r.terminated());
        let head = sim.structure().position(path[0]).unwrap();
        (r.outputs[head].unwrap(), sim.states()[head].iterations)
    }

    #[test]
    fn examples() {
        let mut v = vec![1; 8];
        v[0] = 0;
        assert_eq!(add_tree(8, &v, 6, 0).0, Some(1));
        assert_eq!(add_tree(8, &[0; 8], 6, 1).0, Some(0));
        let mut v = vec![1; 5];
        v[0] = 0;
        assert_eq!(add_tree(5, &v, 2, 2).0, Some(0));
        assert_eq!(add_tree(1, &[5], 7, 3).0, Some(5));
    }

    #[test]
    fn matches_direct_sums() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for case in 0..40u64 {
            let n = rng.gen_range(1..=200);
            let m = rng.gen_range(1..=12);
            let values: Vec<u32> = (0..n).map(|_| rng.gen_range(0..m)).collect();
            let expect = values.iter().sum::<u32>() % m;
            let (got, iters) = add_tree(n, &values, m, case);
            assert_eq!(got, Some(expect), "n={n} m={m}");
            let log = (n as f64).log2().ceil() as u32;
            assert!(iters <= log + 1, "n={n} iterations={iters}");
        }
    }

    #[test]
    fn chain_validation() {
        let (s, path) = snake(5, &[0], Chirality::Ccw);
        assert!(chain_roles(&s, &path).is_ok());
        let broken = vec![path[0], path[2]];
        assert!(matches!(chain_roles(&s, &broken), Err(Error::ChainBroken(_))));
    }

    fn search(n: usize, marks: &[usize], target: u64, levels: u8) -> Vec<SearchOutcome> {
        let (s, path) = snake(n, &[2, 5, 0], Chirality::Ccw);
        let roles = chain_roles(&s, &path).unwrap();
        let states = (0..s.len())
            .map(|i| {
                let pos = path.iter().position(|c| *c == s.coord(i));
                let marked = pos.is_some_and(|p| marks.contains(&p));
                SearchMachine::new(roles[i], marked, target, levels)
            })
            .collect();
        let mut sim = Simulation::with_states(s, &BinarySearch, states);
        let r = sim.run(10_000).unwrap();
        assert!(r.terminated());
        // report in path order for chain members
        path.iter()
            .map(|c| r.outputs[sim.structure().position(*c).unwrap()].unwrap())
            .collect()
    }

    fn found_at(out: &[SearchOutcome]) -> Option<usize> {
        let hits: Vec<usize> = out
            .iter()
            .enumerate()
            .filter(|(_, o)| **o == SearchOutcome::Found(true))
            .map(|(i, _)| i)
            .collect();
        assert!(hits.len() <= 1);
        hits.first().copied()
    }

    #[test]
    fn binary_search_examples() {
        let marks = [1, 3, 4, 8, 9, 13, 15, 16];
        assert_eq!(found_at(&search(20, &marks, 0, 3)), Some(1));
        assert_eq!(found_at(&search(20, &marks, 5, 3)), Some(13));
        let out = search(20, &marks, 8, 3);
        assert!(out.iter().all(|o| *o == SearchOutcome::RankOutOfRange));
    }

    #[test]
    fn binary_search_matches_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let n = rng.gen_range(1..60);
            let marks: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.4)).collect();
            let target = rng.gen_range(0..=marks.len() as u64 + 1);
            let out = search(n, &marks, target, 6);
            match marks.get(target as usize) {
                Some(&p) => assert_eq!(found_at(&out), Some(p)),
                None => assert!(out.iter().all(|o| *o == SearchOutcome::RankOutOfRange)),
            }
        }
    }
}
