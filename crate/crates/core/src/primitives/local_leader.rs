//! Leader election on every bond, and pin-label agreement built on it.

use serde::Serialize;

use crate::engine::{InitView, Protocol, StepCtx};

/// Per-bond tournaments on the empty configuration, interleaved with a
/// global termination tournament repeated `kappa` times and an all-clear
/// check on the global circuit.
///
/// One iteration is four rounds: pairwise HEADS, pairwise TAILS, global
/// HEADS, global TAILS.
#[derive(Clone, Debug, Serialize)]
pub struct LocalLeaderMachine {
    kappa: u32,
    t: u8,
    started: bool,
    /// Bonds (local directions) still undecided.
    open: u8,
    /// Bonds this amoebot leads.
    leads: u8,
    /// HEADS per bond in the current iteration.
    coins: u8,
    heard_heads: u8,
    in_c2: bool,
    c2_heads: bool,
    c2_heard_heads: bool,
    tournaments: u32,
    checking: bool,
    done: bool,
    pub iterations: u32,
}

impl LocalLeaderMachine {
    pub fn new(kappa: u32, neighbors: u8) -> Self {
        LocalLeaderMachine {
            kappa: kappa.max(1),
            t: 0,
            started: false,
            open: neighbors,
            leads: 0,
            coins: 0,
            heard_heads: 0,
            in_c2: true,
            c2_heads: false,
            c2_heard_heads: false,
            tournaments: 0,
            checking: false,
            done: false,
            iterations: 0,
        }
    }

    /// Bonds led by this amoebot, as a mask over local directions.
    pub fn leads(&self) -> u8 {
        self.leads
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    fn bond_heard(ctx: &StepCtx<'_>, d: usize) -> bool {
        ctx.heard_any(ctx.bond_mask(d))
    }

    /// Advances one round; returns true once every bond of the structure is
    /// decided. All amoebots return true in the same round.
    pub fn step(&mut self, ctx: &mut StepCtx<'_>) -> bool {
        if self.done {
            return true;
        }
        if ctx.degree() == 0 {
            self.done = true;
            return true;
        }
        if self.checking {
            self.checking = false;
            if !ctx.heard_anything() {
                self.done = true;
                ctx.clear_config();
                return true;
            }
            // someone is still undecided: check again after the next tournament
            self.tournaments = self.kappa - 1;
            self.started = false;
            self.in_c2 = true;
            self.t = 0;
        }
        match self.t {
            0 => {
                if self.started {
                    let h2 = self.c2_heard_heads;
                    let t2 = ctx.heard_anything();
                    if h2 && self.in_c2 && !self.c2_heads {
                        self.in_c2 = false;
                    }
                    if !(h2 && t2) {
                        self.tournaments += 1;
                        self.in_c2 = true;
                        if self.tournaments >= self.kappa {
                            self.started = false;
                            self.checking = true;
                            ctx.use_global_config();
                            if self.open != 0 {
                                ctx.beep_mask(ctx.bond_pin_mask());
                            }
                            return false;
                        }
                    }
                }
                self.started = true;
                self.iterations += 1;
                ctx.clear_config();
                self.coins = 0;
                for d in 0..6 {
                    if self.open & (1 << d) != 0 && ctx.coin() {
                        self.coins |= 1 << d;
                        ctx.beep_mask(ctx.bond_mask(d));
                    }
                }
                self.t = 1;
            }
            1 => {
                self.heard_heads = 0;
                for d in 0..6 {
                    if self.open & (1 << d) == 0 {
                        continue;
                    }
                    if Self::bond_heard(ctx, d) {
                        self.heard_heads |= 1 << d;
                    }
                    if self.coins & (1 << d) == 0 {
                        ctx.beep_mask(ctx.bond_mask(d));
                    }
                }
                self.t = 2;
            }
            2 => {
                for d in 0..6 {
                    let bit = 1u8 << d;
                    if self.open & bit == 0 {
                        continue;
                    }
                    if self.coins & bit != 0 {
                        if Self::bond_heard(ctx, d) {
                            self.leads |= bit;
                            self.open &= !bit;
                        }
                    } else if self.heard_heads & bit != 0 {
                        self.open &= !bit;
                    }
                }
                ctx.use_global_config();
                self.c2_heads = self.in_c2 && ctx.coin();
                if self.c2_heads {
                    ctx.beep_mask(ctx.bond_pin_mask());
                }
                self.t = 3;
            }
            _ => {
                self.c2_heard_heads = ctx.heard_anything();
                if self.in_c2 && !self.c2_heads {
                    ctx.beep_mask(ctx.bond_pin_mask());
                }
                self.t = 0;
            }
        }
        false
    }
}

/// Standalone local leader election.
pub struct LocalLeaderElection {
    pub kappa: u32,
}

impl Protocol for LocalLeaderElection {
    type State = LocalLeaderMachine;
    /// Mask of led bonds over local directions.
    type Output = u8;

    fn init(&self, view: &InitView) -> LocalLeaderMachine {
        LocalLeaderMachine::new(self.kappa, view.neighbors)
    }

    fn step(&self, st: &mut LocalLeaderMachine, ctx: &mut StepCtx<'_>) {
        st.step(ctx);
    }

    fn output(&self, st: &LocalLeaderMachine) -> Option<u8> {
        st.is_done().then_some(st.leads)
    }
}

/// Pin-label agreement: each bond leader beeps its local pin 0 and the other
/// endpoint learns whether its labeling of that bond is reversed.
#[derive(Clone, Debug, Serialize)]
pub struct PinAgreementMachine {
    t: u8,
    leads: u8,
    /// Bonds whose local pin order this amoebot must reverse.
    pub flips: u8,
}

impl PinAgreementMachine {
    pub fn new(leads: u8) -> Self {
        PinAgreementMachine { t: 0, leads, flips: 0 }
    }

    pub fn step(&mut self, ctx: &mut StepCtx<'_>) -> bool {
        match self.t {
            0 => {
                ctx.clear_config();
                for d in 0..6 {
                    if self.leads & (1 << d) != 0 && ctx.has_neighbor(d) {
                        ctx.beep(ctx.pin(d, 0));
                    }
                }
                self.t = 1;
                false
            }
            1 => {
                let k = ctx.pins_per_edge();
                for d in 0..6 {
                    if ctx.has_neighbor(d)
                        && self.leads & (1 << d) == 0
                        && k > 1
                        && ctx.heard(ctx.pin(d, k - 1))
                    {
                        self.flips |= 1 << d;
                    }
                }
                self.t = 2;
                true
            }
            _ => true,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub enum PinLabelState {
    Electing(LocalLeaderMachine),
    Agreeing(PinAgreementMachine),
    Done { leads: u8, flips: u8 },
}

/// Local leader election followed by pin-label agreement.
pub struct AgreePinLabels {
    pub kappa: u32,
}

impl Protocol for AgreePinLabels {
    type State = PinLabelState;
    /// `(led bonds, reversed bonds)` over local directions.
    type Output = (u8, u8);

    fn init(&self, view: &InitView) -> PinLabelState {
        PinLabelState::Electing(LocalLeaderMachine::new(self.kappa, view.neighbors))
    }

    fn step(&self, st: &mut PinLabelState, ctx: &mut StepCtx<'_>) {
        match st {
            PinLabelState::Electing(m) => {
                if m.step(ctx) {
                    let mut a = PinAgreementMachine::new(m.leads());
                    a.step(ctx);
                    *st = PinLabelState::Agreeing(a);
                }
            }
            PinLabelState::Agreeing(a) => {
                if a.step(ctx) {
                    *st = PinLabelState::Done { leads: a.leads, flips: a.flips };
                }
            }
            PinLabelState::Done { .. } => {}
        }
    }

    fn output(&self, st: &PinLabelState) -> Option<(u8, u8)> {
        match st {
            PinLabelState::Done { leads, flips } => Some((*leads, *flips)),
            _ => None,
        }
    }
}
