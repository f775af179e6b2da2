//! Synchronization barrier over the global circuit.

use serde::Serialize;

use crate::engine::{InitView, Protocol, StepCtx};

/// Acts in a check round: installs the global circuit and beeps if busy.
pub fn barrier_check(ctx: &mut StepCtx<'_>, busy: bool) {
    ctx.use_global_config();
    if busy {
        ctx.beep_mask(ctx.bond_pin_mask());
    }
}

/// Reads the outcome of the previous check round.
pub fn barrier_released(ctx: &StepCtx<'_>) -> bool {
    !ctx.heard_anything()
}

/// Test protocol: each amoebot stays busy for a scripted number of periods.
/// The last round of every period is a check round.
pub struct SyncBarrier {
    pub period: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct BarrierState {
    pub busy_periods: u32,
    t: u64,
    released_in: Option<u32>,
}

impl BarrierState {
    pub fn busy_for(periods: u32) -> Self {
        BarrierState { busy_periods: periods, t: 0, released_in: None }
    }
}

impl Protocol for SyncBarrier {
    type State = BarrierState;
    /// Period in which the barrier released.
    type Output = u32;

    fn init(&self, _: &InitView) -> BarrierState {
        BarrierState::busy_for(0)
    }

    fn step(&self, st: &mut BarrierState, ctx: &mut StepCtx<'_>) {
        if st.released_in.is_some() {
            return;
        }
        let p = self.period.max(1) as u64;
        let period = (st.t / p) as u32;
        if st.t % p == 0 && st.t > 0 && barrier_released(ctx) {
            st.released_in = Some(period);
            return;
        }
        if st.t % p == p - 1 {
            barrier_check(ctx, period < st.busy_periods);
        } else {
            ctx.clear_config();
        }
        st.t += 1;
    }

    fn output(&self, st: &BarrierState) -> Option<u32> {
        st.released_in
    }
}
