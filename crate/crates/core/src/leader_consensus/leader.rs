//! Leader election on the global circuit.
//!
//! Phase 1 runs a HEADS/TAILS tournament on the candidate set `C1` until an
//! iteration in which one of the two rounds is silent. Phase 2 keeps that
//! tournament going while a second tournament on `C2` (reset to all
//! amoebots) runs alongside; after `kappa` complete `C2` tournaments the
//! remaining `C1` members are the leaders.

use serde::Serialize;

use crate::engine::{InitView, Protocol, StepCtx};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum Coin {
    #[default]
    None,
    Heads,
    Tails,
}

impl Coin {
    fn toss(ctx: &mut StepCtx<'_>) -> Coin {
        if ctx.coin() {
            Coin::Heads
        } else {
            Coin::Tails
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LeaderPhase {
    Phase1,
    Phase2,
    Done,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Leader,
    Follower,
}

#[derive(Clone, Debug, Serialize)]
pub struct LeaderMachine {
    kappa: u32,
    pub in_c1: bool,
    pub in_c2: bool,
    pub c1: Coin,
    pub c2: Coin,
    pub phase: LeaderPhase,
    /// Completed `C2` tournaments.
    pub kappa_count: u32,
    slot: u8,
    heard_h1: bool,
    heard_h2: bool,
    started: bool,
    /// Round in which phase 1 ended, and whether this amoebot was still a
    /// candidate then.
    pub phase1_exit: Option<(u64, bool)>,
}

impl LeaderMachine {
    pub fn new(kappa: u32) -> Self {
        LeaderMachine {
            kappa: kappa.max(1),
            in_c1: true,
            in_c2: true,
            c1: Coin::None,
            c2: Coin::None,
            phase: LeaderPhase::Phase1,
            kappa_count: 0,
            slot: 0,
            heard_h1: false,
            heard_h2: false,
            started: false,
            phase1_exit: None,
        }
    }

    pub fn is_done(&self) -> bool {
        self.phase == LeaderPhase::Done
    }

    pub fn verdict(&self) -> Option<Verdict> {
        self.is_done()
            .then_some(if self.in_c1 { Verdict::Leader } else { Verdict::Follower })
    }

    /// TAILS candidates leave when some candidate tossed HEADS.
    fn settle_c1(&mut self, h: bool) {
        if h && self.c1 == Coin::Tails {
            self.in_c1 = false;
        }
    }

    fn settle_c2(&mut self, h: bool) {
        if h && self.c2 == Coin::Tails {
            self.in_c2 = false;
        }
    }

    fn toss_c1(&mut self, ctx: &mut StepCtx<'_>) {
        self.c1 = if self.in_c1 { Coin::toss(ctx) } else { Coin::None };
        if self.c1 == Coin::Heads {
            ctx.beep_all();
        }
    }

    /// Advances one round; returns true once the election has finished.
    /// Every amoebot finishes in the same round.
    pub fn step(&mut self, ctx: &mut StepCtx<'_>) -> bool {
        if self.is_done() {
            return true;
        }
        if ctx.degree() == 0 {
            self.phase = LeaderPhase::Done;
            return true;
        }
        ctx.use_global_config();
        match self.phase {
            LeaderPhase::Phase1 => {
                if self.slot == 0 {
                    if self.started {
                        let (h, t) = (self.heard_h1, ctx.heard_anything());
                        self.settle_c1(h);
                        if !(h && t) {
                            self.phase1_exit = Some((ctx.round(), self.in_c1));
                            self.phase = LeaderPhase::Phase2;
                            self.started = false;
                            return self.step_phase2(ctx);
                        }
                    }
                    self.started = true;
                    self.toss_c1(ctx);
                    self.slot = 1;
                } else {
                    self.heard_h1 = ctx.heard_anything();
                    if self.c1 == Coin::Tails {
                        ctx.beep_all();
                    }
                    self.slot = 0;
                }
                false
            }
            LeaderPhase::Phase2 => self.step_phase2(ctx),
            LeaderPhase::Done => true,
        }
    }

    fn step_phase2(&mut self, ctx: &mut StepCtx<'_>) -> bool {
        match self.slot {
            0 => {
                if self.started {
                    let (h, t) = (self.heard_h2, ctx.heard_anything());
                    self.settle_c2(h);
                    if !(h && t) {
                        self.kappa_count += 1;
                        self.in_c2 = true;
                        if self.kappa_count >= self.kappa {
                            self.phase = LeaderPhase::Done;
                            ctx.clear_config();
                            return true;
                        }
                    }
                }
                self.started = true;
                self.toss_c1(ctx);
                self.slot = 1;
            }
            1 => {
                self.heard_h1 = ctx.heard_anything();
                if self.c1 == Coin::Tails {
                    ctx.beep_all();
                }
                self.slot = 2;
            }
            2 => {
                let h = self.heard_h1;
                self.settle_c1(h);
                self.c2 = if self.in_c2 { Coin::toss(ctx) } else { Coin::None };
                if self.c2 == Coin::Heads {
                    ctx.beep_all();
                }
                self.slot = 3;
            }
            _ => {
                self.heard_h2 = ctx.heard_anything();
                if self.c2 == Coin::Tails {
                    ctx.beep_all();
                }
                self.slot = 0;
            }
        }
        false
    }
}

/// Standalone leader election.
pub struct LeaderElection {
    pub kappa: u32,
}

impl Protocol for LeaderElection {
    type State = LeaderMachine;
    type Output = Verdict;

    fn init(&self, _: &InitView) -> LeaderMachine {
        LeaderMachine::new(self.kappa)
    }

    fn step(&self, st: &mut LeaderMachine, ctx: &mut StepCtx<'_>) {
        st.step(ctx);
    }

    fn output(&self, st: &LeaderMachine) -> Option<Verdict> {
        st.verdict()
    }
}
