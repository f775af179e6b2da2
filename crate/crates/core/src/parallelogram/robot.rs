//! Circuit helpers and the robot positioning phase shared by the ratio
//! protocols.
//!
//! The robot is a flag held by at least one amoebot. Positioning moves every
//! robot along straight lines to the same three-neighbor corner, where they
//! merge into one, and lets the robot fix a common frame: "north-east" along
//! the longer side, "south" along the shorter one, so the robot sits in the
//! north-west corner.

use serde::Serialize;

use super::neighborhood::{classify, run_start, NeighborhoodType};
use crate::engine::{PinConfig, StepCtx};
use crate::primitives::connect_bonds;

/// Canonical directions once the frame is fixed.
pub const NE: usize = 0;
pub const N: usize = 1;
pub const NW: usize = 2;
pub const SW: usize = 3;
pub const S: usize = 4;
pub const SE: usize = 5;

/// Straight lines along all three axes, cut at nodes missing a neighbor.
/// `split` leaves one axis unconnected at this amoebot.
pub fn axis_lines(ctx: &StepCtx<'_>, split: Option<usize>) -> PinConfig {
    let mut cfg = PinConfig::EMPTY;
    let k = ctx.pins_per_edge();
    for a in 0..3 {
        if ctx.has_neighbor(a) && ctx.has_neighbor(a + 3) && split.map(|s| s % 3) != Some(a) {
            connect_bonds(&mut cfg, k, a, a + 3);
        }
    }
    cfg
}

pub fn beep_bond(ctx: &mut StepCtx<'_>, d: usize) {
    ctx.beep_mask(ctx.bond_mask(d));
}

pub fn heard_bond(ctx: &StepCtx<'_>, d: usize) -> bool {
    ctx.has_neighbor(d) && ctx.heard_any(ctx.bond_mask(d))
}

/// True if a beep arrived along a line that ends here.
fn line_ends_here(ctx: &StepCtx<'_>) -> bool {
    (0..6).any(|x| heard_bond(ctx, x) && !ctx.has_neighbor((x + 3) % 6))
}

/// Map between local and canonical directions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Frame {
    /// Local start of the robot corner's neighbor run.
    pub d: u8,
    /// Mirror the frame so that the longer side is north-east.
    pub swap: bool,
}

impl Frame {
    pub fn local(self, c: usize) -> usize {
        let d = self.d as i32;
        let c = c as i32;
        (if self.swap { d - c } else { c + d + 2 }).rem_euclid(6) as usize
    }

    pub fn canonical(self, x: usize) -> usize {
        let d = self.d as i32;
        let x = x as i32;
        (if self.swap { d - x } else { x - d - 2 }).rem_euclid(6) as usize
    }

    pub fn has(self, ctx: &StepCtx<'_>, c: usize) -> bool {
        ctx.has_neighbor(self.local(c))
    }

    pub fn north(self, ctx: &StepCtx<'_>) -> bool {
        !self.has(ctx, N)
    }

    pub fn south(self, ctx: &StepCtx<'_>) -> bool {
        !self.has(ctx, S)
    }

    pub fn west(self, ctx: &StepCtx<'_>) -> bool {
        !self.has(ctx, SW)
    }

    pub fn east(self, ctx: &StepCtx<'_>) -> bool {
        !self.has(ctx, NE)
    }
}

/// Rounds of the positioning phase; the frame is known in the step after.
pub const POSITIONING_ROUNDS: u8 = 9;

#[derive(Clone, Debug, Default, Serialize)]
pub struct Positioning {
    t: u8,
    pub robot: bool,
    /// Handed the robot on in this step.
    pub(crate) sent: bool,
    swap: bool,
    d: u8,
    pub frame: Option<Frame>,
}

impl Positioning {
    pub fn new(robot: bool) -> Self {
        Positioning { robot, ..Default::default() }
    }

    /// Returns true once the frame is known, without acting in that step.
    pub fn step(&mut self, ctx: &mut StepCtx<'_>) -> bool {
        if self.frame.is_some() {
            return true;
        }
        let kind = classify(ctx.neighbors());
        let run = run_start(ctx.neighbors()).map(|d| d as usize);
        let t = self.t;
        self.t += 1;
        if (1..=4).contains(&t) && !self.sent && line_ends_here(ctx) {
            self.robot = true;
        }
        self.sent = false;
        use NeighborhoodType::*;
        match t {
            0..=3 => {
                // interior → boundary → corner; a 120° corner with run start
                // of at least 3 steps aside, and every 60° corner moves to
                // the 120° corner whose run start is below 3
                let hop = match (t, kind, run) {
                    (0, T5, _) => Some(0),
                    (1, T4, Some(s)) => Some(s),
                    (2, T3, Some(s)) if s >= 3 => Some(s),
                    (3, T2, Some(s)) => Some(if (s + 1) % 6 < 3 { s } else { (s + 1) % 6 }),
                    _ => None,
                };
                let hop = hop.filter(|_| self.robot);
                ctx.set_config(axis_lines(ctx, hop));
                if let Some(d) = hop {
                    beep_bond(ctx, d);
                    self.robot = false;
                    self.sent = true;
                }
            }
            4 => {
                ctx.set_config(axis_lines(ctx, None));
                if self.robot {
                    beep_bond(ctx, run.unwrap() + 1);
                }
            }
            5 => {
                // the end of the diagonal decides which side is shorter
                let end = (0..6).find(|x| heard_bond(ctx, *x) && !ctx.has_neighbor((x + 3) % 6));
                ctx.use_global_config();
                if let Some(x) = end {
                    let d = (x + 2) % 6;
                    let swap = kind == T4 && run.is_some_and(|c| c % 3 != (d + 2) % 3);
                    if swap {
                        ctx.beep_all();
                    }
                }
            }
            6..=8 => {
                if t == 6 {
                    self.swap = ctx.heard_anything();
                } else if ctx.heard_anything() {
                    self.d |= 1 << (t - 7);
                }
                ctx.use_global_config();
                if self.robot && (run.unwrap_or(0) >> (t - 6)) & 1 == 1 {
                    ctx.beep_all();
                }
            }
            _ => {
                if ctx.heard_anything() {
                    self.d |= 1 << 2;
                }
                self.frame = Some(Frame { d: self.d, swap: self.swap });
                return true;
            }
        }
        false
    }
}
