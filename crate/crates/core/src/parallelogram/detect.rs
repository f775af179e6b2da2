//! Constant-round parallelogram detection.
//!
//! Rounds 0..7 announce neighborhood types on the global circuit, one round
//! per type. For a non-degenerate candidate, the two-neighbor corners then
//! beep along their axis lines, and every three-neighbor corner must hear
//! two of them; a final global round collects objections.

use serde::Serialize;

use super::neighborhood::{classify, NeighborhoodType};
use super::robot::{axis_lines, beep_bond};
use crate::engine::{InitView, Protocol, StepCtx};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Detection {
    Accept { degenerate: bool },
    Reject,
}

impl Detection {
    pub fn accepted(self) -> bool {
        matches!(self, Detection::Accept { .. })
    }
}

pub struct ParallelogramDetection;

#[derive(Clone, Debug, Default, Serialize)]
pub struct DetectState {
    t: u8,
    types: u8,
    verdict: Option<Detection>,
}

const TYPE_ROUNDS: u8 = 7;

impl Protocol for ParallelogramDetection {
    type State = DetectState;
    type Output = Detection;

    fn init(&self, _: &InitView) -> DetectState {
        DetectState::default()
    }

    fn step(&self, st: &mut DetectState, ctx: &mut StepCtx<'_>) {
        if st.verdict.is_some() {
            return;
        }
        let mine = classify(ctx.neighbors());
        if ctx.degree() == 0 {
            st.verdict = Some(Detection::Accept { degenerate: true });
            return;
        }
        let t = st.t;
        st.t += 1;
        if (1..=TYPE_ROUNDS).contains(&t) && ctx.heard_anything() {
            st.types |= 1 << (t - 1);
        }
        if t < TYPE_ROUNDS {
            ctx.use_global_config();
            if mine.index() == t as usize {
                ctx.beep_all();
            }
            return;
        }
        use NeighborhoodType::*;
        let has = |x: NeighborhoodType| st.types & x.bit() != 0;
        if t == TYPE_ROUNDS {
            let only = |allowed: &[NeighborhoodType]| {
                NeighborhoodType::ALL.iter().all(|x| !has(*x) || allowed.contains(x))
            };
            let verdict = if has(T7) {
                Some(Detection::Reject)
            } else if has(T1) {
                Some(if only(&[T1, T6]) { Detection::Accept { degenerate: true } } else { Detection::Reject })
            } else if !only(&[T2, T3, T4, T5]) || !has(T2) || !has(T3) {
                Some(Detection::Reject)
            } else {
                None
            };
            if let Some(v) = verdict {
                st.verdict = Some(v);
                ctx.clear_config();
                return;
            }
            ctx.set_config(axis_lines(ctx, None));
            if mine == T2 {
                for d in 0..6 {
                    if ctx.has_neighbor(d) {
                        beep_bond(ctx, d);
                    }
                }
            }
            return;
        }
        if t == TYPE_ROUNDS + 1 {
            let lines = (0..6).filter(|d| ctx.heard_any(ctx.bond_mask(*d))).count();
            ctx.use_global_config();
            if mine == T3 && lines < 2 {
                ctx.beep_all();
            }
            return;
        }
        st.verdict = Some(if ctx.heard_anything() {
            Detection::Reject
        } else {
            Detection::Accept { degenerate: false }
        });
        ctx.clear_config();
    }

    fn output(&self, st: &DetectState) -> Option<Detection> {
        st.verdict
    }
}

/// Rounds used on a structure with at least two amoebots that survives the
/// type announcement.
pub const DETECTION_ROUNDS: u64 = TYPE_ROUNDS as u64 + 3;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{Simulation, Structure};
    use crate::grid::GridCoord;
    use crate::harness::generators::{gen_parallelogram, gen_random_connected, random_orientations};
    use crate::parallelogram::parallelogram_sides;

    fn detect(coords: &[GridCoord], seed: u64) -> (Detection, u64) {
        let o = random_orientations(coords.len(), seed, true, true);
        let s = Structure::new(coords, &o, 2, seed).unwrap();
        let mut sim = Simulation::new(s, &ParallelogramDetection);
        let r = sim.run(100).unwrap();
        (r.unanimous().expect("all amoebots agree"), r.rounds)
    }

    #[test]
    fn single_amoebot_is_degenerate() {
        assert_eq!(detect(&[GridCoord::new(0, 0)], 1).0, Detection::Accept { degenerate: true });
    }

    #[test]
    fn lines_are_degenerate() {
        for l in 1..6 {
            let c = gen_parallelogram(0, l, 2);
            assert_eq!(detect(&c, l as u64).0, Detection::Accept { degenerate: true });
        }
    }

    #[test]
    fn all_small_parallelograms_accept_in_constant_rounds() {
        for h in 1..=8 {
            for l in h..=8 {
                let c = gen_parallelogram(h, l, (h + l) as u8 % 6);
                let (v, rounds) = detect(&c, (h * 10 + l) as u64);
                assert_eq!(v, Detection::Accept { degenerate: false }, "h = {h}, l = {l}");
                assert_eq!(rounds, DETECTION_ROUNDS);
            }
        }
    }

    #[test]
    fn trapezoid_and_triangle_reject() {
        let mut trap = Vec::new();
        for r in 0..3 {
            for q in 0..5 - r {
                trap.push(GridCoord::new(q, r));
            }
        }
        assert_eq!(detect(&trap, 3).0, Detection::Reject);
        trap.retain(|c| c.q + c.r <= 3);
        assert_eq!(detect(&trap, 4).0, Detection::Reject);
    }

    #[test]
    fn matches_oracle_on_random_blobs() {
        for seed in 0..60 {
            let c = gen_random_connected(3 + seed as usize % 20, seed);
            let expect = parallelogram_sides(&c).is_some();
            assert_eq!(detect(&c, seed).0.accepted(), expect, "seed {seed}");
        }
    }
}
