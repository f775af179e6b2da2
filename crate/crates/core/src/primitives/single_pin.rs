//! Message transmission with a single pin per bond.
//!
//! Time is divided into windows of `len + 2` rounds: an initiation round,
//! an arbitration round in which the prioritized endpoint beeps if it
//! initiated, and `len` bit rounds for the winner.

use serde::Serialize;

use crate::engine::{InitView, Protocol, StepCtx};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
enum Role {
    #[default]
    Idle,
    Sender,
    Receiver,
}

#[derive(Clone, Debug, Default, Serialize)]
struct Link {
    priority: bool,
    outbox: Vec<u64>,
    inbox: Vec<u64>,
    initiated: bool,
    heard_init: bool,
    role: Role,
    bits: u64,
    /// Windows in which this endpoint transmitted.
    sent_in: Vec<u32>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SinglePinMachine {
    len: u8,
    t: u64,
    handoff: bool,
    links: [Link; 6],
}

impl SinglePinMachine {
    /// `priority` is the mask of bonds this amoebot leads.
    pub fn new(len: u8, priority: u8) -> Self {
        let mut links: [Link; 6] = Default::default();
        for (d, l) in links.iter_mut().enumerate() {
            l.priority = priority & (1 << d) != 0;
        }
        SinglePinMachine { len, t: 0, handoff: true, links }
    }

    pub fn without_handoff(mut self) -> Self {
        self.handoff = false;
        self
    }

    pub fn enqueue(&mut self, d: usize, msg: u64) {
        self.links[d].outbox.push(msg);
    }

    pub fn inbox(&self, d: usize) -> &[u64] {
        &self.links[d].inbox
    }

    pub fn outbox_len(&self, d: usize) -> usize {
        self.links[d].outbox.len()
    }

    pub fn sent_windows(&self, d: usize) -> &[u32] {
        &self.links[d].sent_in
    }

    pub fn window_len(&self) -> u64 {
        self.len as u64 + 2
    }

    pub fn step(&mut self, ctx: &mut StepCtx<'_>) {
        let w = self.t % self.window_len();
        let window = (self.t / self.window_len()) as u32;
        let len = self.len as u64;
        let k = ctx.pins_per_edge();
        ctx.clear_config();
        for d in 0..6 {
            if !ctx.has_neighbor(d) {
                continue;
            }
            let pin = d * k;
            let heard = ctx.heard(pin);
            let l = &mut self.links[d];
            match w {
                0 => {
                    if l.role == Role::Receiver && len > 0 && heard {
                        l.bits |= 1 << (len - 1);
                    }
                    Self::finish(l, self.handoff);
                    l.initiated = !l.outbox.is_empty();
                    if l.initiated {
                        ctx.beep(pin);
                    }
                }
                1 => {
                    l.heard_init = heard;
                    if l.priority && l.initiated {
                        ctx.beep(pin);
                    }
                }
                _ => {
                    if w == 2 {
                        let arb = heard;
                        l.role = if !l.heard_init {
                            Role::Idle
                        } else if l.priority {
                            if l.initiated {
                                Role::Sender
                            } else {
                                Role::Receiver
                            }
                        } else if arb {
                            Role::Receiver
                        } else if l.initiated {
                            Role::Sender
                        } else {
                            Role::Idle
                        };
                        l.bits = 0;
                        if l.role == Role::Sender {
                            l.sent_in.push(window);
                        }
                    } else if l.role == Role::Receiver && heard {
                        l.bits |= 1 << (w - 3);
                    }
                    let j = w - 2;
                    if l.role == Role::Sender && (l.outbox[0] >> j) & 1 == 1 {
                        ctx.beep(pin);
                    }
                }
            }
        }
        self.t += 1;
    }

    fn finish(l: &mut Link, handoff: bool) {
        match l.role {
            Role::Sender => {
                l.outbox.remove(0);
                if handoff {
                    l.priority = false;
                }
            }
            Role::Receiver => {
                l.inbox.push(l.bits);
                if handoff {
                    l.priority = true;
                }
            }
            Role::Idle => {}
        }
        l.role = Role::Idle;
        l.bits = 0;
    }
}

/// Runs a fixed number of windows; initial states carry the queues.
pub struct SinglePinMessage {
    pub windows: u32,
}

impl Protocol for SinglePinMessage {
    type State = SinglePinMachine;
    type Output = ();

    fn init(&self, _: &InitView) -> SinglePinMachine {
        SinglePinMachine::new(0, 0)
    }

    fn step(&self, st: &mut SinglePinMachine, ctx: &mut StepCtx<'_>) {
        st.step(ctx);
    }

    fn output(&self, st: &SinglePinMachine) -> Option<()> {
        // one extra round reads the last bit of the final window
        (st.t > self.windows as u64 * st.window_len()).then_some(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{Simulation, Structure};
    use crate::grid::GridCoord;
    use rand::{Rng, SeedableRng};

    /// Amoebot 0 at the origin leads the bond to amoebot 1 at (1, 0).
    fn pair(m0: SinglePinMachine, m1: SinglePinMachine, windows: u32) -> Vec<SinglePinMachine> {
        let s = Structure::uniform(&[GridCoord::new(0, 0), GridCoord::new(1, 0)], 1, 0).unwrap();
        let p = SinglePinMessage { windows };
        let mut sim = Simulation::with_states(s, &p, vec![m0, m1]);
        let r = sim.run(1000).unwrap();
        assert!(r.terminated());
        sim.into_parts().1
    }

    #[test]
    fn leader_alone_sends() {
        let mut a = SinglePinMachine::new(4, 1 << 0);
        a.enqueue(0, 0b1011);
        let b = SinglePinMachine::new(4, 0);
        let out = pair(a, b, 1);
        assert_eq!(out[1].inbox(3), &[0b1011]);
        assert_eq!(out[0].outbox_len(0), 0);
        assert_eq!(out[0].sent_windows(0), &[0]);
    }

    #[test]
    fn simultaneous_initiation_leader_wins() {
        let mut a = SinglePinMachine::new(4, 1 << 0).without_handoff();
        a.enqueue(0, 0b0110);
        let mut b = SinglePinMachine::new(4, 0).without_handoff();
        b.enqueue(3, 0b1001);
        let out = pair(a, b, 1);
        assert_eq!(out[1].inbox(3), &[0b0110]);
        assert!(out[0].inbox(0).is_empty());
        // the cancelled message stays queued
        assert_eq!(out[1].outbox_len(3), 1);
    }

    #[test]
    fn non_leader_alone_is_free_to_send() {
        let a = SinglePinMachine::new(3, 1 << 0);
        let mut b = SinglePinMachine::new(3, 0);
        b.enqueue(3, 0b101);
        let out = pair(a, b, 1);
        assert_eq!(out[0].inbox(0), &[0b101]);
    }

    #[test]
    fn handoff_alternates_and_never_interleaves() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut a = SinglePinMachine::new(5, 1 << 0);
        let mut b = SinglePinMachine::new(5, 0);
        let (mut qa, mut qb) = (Vec::new(), Vec::new());
        for _ in 0..4 {
            let x = rng.gen_range(0..32);
            let y = rng.gen_range(0..32);
            a.enqueue(0, x);
            b.enqueue(3, y);
            qa.push(x);
            qb.push(y);
        }
        let out = pair(a, b, 8);
        assert_eq!(out[1].inbox(3), &qa[..]);
        assert_eq!(out[0].inbox(0), &qb[..]);
        let (sa, sb) = (out[0].sent_windows(0), out[1].sent_windows(3));
        assert!(sa.iter().all(|w| !sb.contains(w)));
        // priority handoff makes the two senders alternate
        assert_eq!(sa, &[0, 2, 4, 6]);
        assert_eq!(sb, &[1, 3, 5, 7]);
    }
}
