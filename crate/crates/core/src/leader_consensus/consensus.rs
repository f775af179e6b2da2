//! Consensus on one of `k_vals` input values over the global circuit.

use serde::Serialize;

use crate::engine::{InitView, Protocol, StepCtx};

/// An amoebot with input `i` beeps in round `i`; everyone decides the first
/// round that carried a beep, which is the minimum input.
#[derive(Clone, Debug, Serialize)]
pub struct ConsensusMachine {
    pub input: u32,
    k_vals: u32,
    t: u32,
    pub decided: Option<u32>,
}

impl ConsensusMachine {
    pub fn new(input: u32, k_vals: u32) -> Self {
        assert!((1..=k_vals).contains(&input), "input {input} outside 1..={k_vals}");
        ConsensusMachine { input, k_vals, t: 0, decided: None }
    }

    /// Advances one round; all amoebots finish after `k_vals + 1` steps.
    pub fn step(&mut self, ctx: &mut StepCtx<'_>) -> bool {
        if self.t > self.k_vals {
            return true;
        }
        // alone on the global circuit: the own input is the minimum
        if ctx.degree() == 0 && self.decided.is_none() {
            self.decided = Some(self.input);
        }
        if self.t > 0 && self.decided.is_none() && ctx.heard_anything() {
            self.decided = Some(self.t);
        }
        if self.t == self.k_vals {
            self.t += 1;
            ctx.clear_config();
            return true;
        }
        self.t += 1;
        ctx.use_global_config();
        if self.input == self.t {
            ctx.beep_all();
        }
        false
    }

    pub fn is_done(&self) -> bool {
        self.t > self.k_vals
    }
}

pub struct Consensus {
    pub k_vals: u32,
}

impl Protocol for Consensus {
    type State = ConsensusMachine;
    type Output = u32;

    fn init(&self, _: &InitView) -> ConsensusMachine {
        ConsensusMachine::new(1, self.k_vals)
    }

    fn step(&self, st: &mut ConsensusMachine, ctx: &mut StepCtx<'_>) {
        st.step(ctx);
    }

    fn output(&self, st: &ConsensusMachine) -> Option<u32> {
        if st.is_done() {
            st.decided
        } else {
            None
        }
    }
}
