//! Fixed-length message exchange with neighbors over bond pins.

use serde::Serialize;

use crate::engine::{InitView, PinConfig, Protocol, StepCtx};

/// Sends one fixed-length bit string per bond and receives the neighbors'
/// strings, one bit per round, least significant bit first.
///
/// By default the amoebot sends on its local pin 0 of each bond and listens
/// on pin `k - 1`, which under a common chirality is the neighbor's pin 0.
#[derive(Clone, Debug, Serialize)]
pub struct MessageMachine {
    len: u8,
    t: u8,
    outgoing: [Option<u64>; 6],
    incoming: [u64; 6],
    send_pin: [u8; 6],
    recv_pin: [u8; 6],
}

impl MessageMachine {
    pub fn new(len: u8, outgoing: [Option<u64>; 6], k: usize) -> Self {
        assert!(len <= 64);
        MessageMachine {
            len,
            t: 0,
            outgoing,
            incoming: [0; 6],
            send_pin: [0; 6],
            recv_pin: [(k - 1) as u8; 6],
        }
    }

    /// Same message on every bond.
    pub fn broadcast(len: u8, payload: u64, k: usize) -> Self {
        Self::new(len, [Some(payload); 6], k)
    }

    /// Overrides the pins used on the bond in local direction `d`.
    pub fn with_pins(mut self, d: usize, send: u8, recv: u8) -> Self {
        self.send_pin[d] = send;
        self.recv_pin[d] = recv;
        self
    }

    pub fn incoming(&self) -> &[u64; 6] {
        &self.incoming
    }

    pub fn received_from(&self, d: usize) -> u64 {
        self.incoming[d]
    }

    pub fn rounds(&self) -> u64 {
        self.len as u64 + 1
    }

    /// Returns true in the step that reads the last bit.
    pub fn step(&mut self, ctx: &mut StepCtx<'_>) -> bool {
        self.step_on(ctx, PinConfig::EMPTY)
    }

    /// Like [`step`](Self::step), but installs `cfg` while sending, so bits
    /// can travel over longer circuits than single bonds.
    pub fn step_on(&mut self, ctx: &mut StepCtx<'_>, cfg: PinConfig) -> bool {
        let k = ctx.pins_per_edge();
        if self.t > 0 && self.t <= self.len {
            let bit = self.t - 1;
            for d in 0..6 {
                if ctx.has_neighbor(d) && ctx.heard(d * k + self.recv_pin[d] as usize) {
                    self.incoming[d] |= 1 << bit;
                }
            }
        }
        if self.t >= self.len {
            self.t = self.len + 1;
            return true;
        }
        ctx.set_config(cfg);
        for d in 0..6 {
            if let Some(m) = self.outgoing[d] {
                if ctx.has_neighbor(d) && (m >> self.t) & 1 == 1 {
                    ctx.beep(d * k + self.send_pin[d] as usize);
                }
            }
        }
        self.t += 1;
        false
    }
}

/// Standalone exchange; initial states carry the payloads.
pub struct MultiPinMessage;

impl Protocol for MultiPinMessage {
    type State = (MessageMachine, bool);
    type Output = [u64; 6];

    fn init(&self, view: &InitView) -> Self::State {
        (MessageMachine::new(0, [None; 6], view.pins_per_edge), false)
    }

    fn step(&self, st: &mut Self::State, ctx: &mut StepCtx<'_>) {
        if !st.1 {
            st.1 = st.0.step(ctx);
        }
    }

    fn output(&self, st: &Self::State) -> Option<[u64; 6]> {
        st.1.then(|| st.0.incoming)
    }
}
