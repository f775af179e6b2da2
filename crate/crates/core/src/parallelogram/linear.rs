//! Linear side ratio `l = a·h + b` by a zig-zag of the robot.
//!
//! Each zig-zag leg is one round: the robot beeps along an axis line and the
//! amoebot at its far end takes over. The `b` final steps move one node per
//! round along the northern side.

use serde::Serialize;

use super::robot::{axis_lines, beep_bond, heard_bond, Frame, Positioning, N, NE, SE};
use crate::engine::{InitView, Protocol, StepCtx};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
enum Leg {
    /// To the far end of the line, which must satisfy the leg's target side.
    Line(usize),
    Step(usize),
}

pub struct LinearRatio {
    pub a: u32,
    pub b: u32,
}

impl LinearRatio {
    fn legs(&self) -> Vec<Leg> {
        let mut legs = Vec::new();
        for _ in 0..self.a {
            legs.push(Leg::Line(SE));
            legs.push(Leg::Line(N));
        }
        legs.extend((0..self.b).map(|_| Leg::Step(NE)));
        legs
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LinearState {
    pos: Positioning,
    s: u32,
    robot: bool,
    sent: bool,
    failed: bool,
    objection: bool,
    verdict: Option<bool>,
}

impl LinearState {
    pub fn new(robot: bool) -> Self {
        LinearState {
            pos: Positioning::new(robot),
            s: 0,
            robot: false,
            sent: false,
            failed: false,
            objection: false,
            verdict: None,
        }
    }
}

impl Protocol for LinearRatio {
    type State = LinearState;
    type Output = bool;

    fn init(&self, _: &InitView) -> LinearState {
        LinearState::new(false)
    }

    fn step(&self, st: &mut LinearState, ctx: &mut StepCtx<'_>) {
        if st.verdict.is_some() {
            return;
        }
        if !st.pos.step(ctx) {
            return;
        }
        let f: Frame = st.pos.frame.unwrap();
        if st.s == 0 {
            st.robot = st.pos.robot;
        }
        let legs = self.legs();
        let s = st.s as usize;
        st.s += 1;
        // read the previous leg
        if s > 0 && s <= legs.len() && !st.sent {
            match legs[s - 1] {
                Leg::Line(c) => {
                    if heard_bond(ctx, f.local((c + 3) % 6)) && !f.has(ctx, c) {
                        st.robot = true;
                        // a south-east leg must end on the southern side
                        if c == SE && !f.south(ctx) {
                            st.failed = true;
                        }
                    }
                }
                Leg::Step(c) => {
                    if heard_bond(ctx, f.local((c + 3) % 6)) {
                        st.robot = true;
                    }
                }
            }
        }
        st.sent = false;
        if s < legs.len() {
            let (c, line) = match legs[s] {
                Leg::Line(c) => (c, true),
                Leg::Step(c) => (c, false),
            };
            let x = f.local(c);
            if line {
                ctx.set_config(axis_lines(ctx, st.robot.then_some(x)));
            } else {
                ctx.clear_config();
            }
            if st.robot {
                if ctx.has_neighbor(x) {
                    beep_bond(ctx, x);
                    st.robot = false;
                    st.sent = true;
                } else {
                    st.failed = true;
                }
            }
            return;
        }
        ctx.use_global_config();
        if s == legs.len() {
            if st.failed {
                ctx.beep_all();
            }
        } else if s == legs.len() + 1 {
            st.objection = ctx.heard_anything();
            if st.robot && f.north(ctx) && f.east(ctx) {
                ctx.beep_all();
            }
        } else {
            st.verdict = Some(!st.objection && ctx.heard_anything());
            ctx.clear_config();
        }
    }

    fn output(&self, st: &LinearState) -> Option<bool> {
        st.verdict
    }
}
