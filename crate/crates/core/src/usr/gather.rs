//! Iterative information gathering with fixed-length truth-table messages.
//!
//! A message lists, for every position of a fixed window around the sender,
//! whether it is occupied (or, for triangle maps, whether the triangle is
//! known). Positions are expressed in the frame of the bond: the sender
//! turns its map so that the bond points along direction 0, and the
//! receiver turns it back using its own label of the bond. Only a common
//! chirality is needed.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use serde::Serialize;

use crate::engine::{InitView, PinConfig, Protocol, StepCtx};
use crate::grid::{Direction, GridCoord};
use crate::primitives::MessageMachine;
use crate::shapes::{wedge_face, Triangle};

/// Nodes at distance `1..=r` from the origin, sorted.
pub fn ball(r: u32) -> Vec<GridCoord> {
    let r = r as i32;
    let mut out = Vec::new();
    for q in -r..=r {
        for s in -r..=r {
            let p = GridCoord::new(q, s);
            if p.norm() >= 1 && p.norm() <= r as u32 {
                out.push(p);
            }
        }
    }
    out.sort();
    out
}

/// Unit triangles with all corners within distance `r` of the origin, sorted.
pub fn window_triangles(r: u32) -> Vec<Triangle> {
    let mut nodes = ball(r);
    nodes.push(GridCoord::ORIGIN);
    let set: BTreeSet<Triangle> = nodes
        .iter()
        .flat_map(|c| (0..6).map(move |w| wedge_face(*c, w)))
        .filter(|t| t.vertices().iter().all(|v| v.norm() <= r))
        .collect();
    set.into_iter().collect()
}

/// Largest radius served from the precomputed windows.
pub const MAX_WINDOW: u32 = 24;

fn cached_ball(r: u32) -> &'static [GridCoord] {
    static BALLS: OnceLock<Vec<Vec<GridCoord>>> = OnceLock::new();
    assert!(r <= MAX_WINDOW, "gathering radius {r} exceeds {MAX_WINDOW}");
    &BALLS.get_or_init(|| (0..=MAX_WINDOW).map(ball).collect())[r as usize]
}

fn cached_triangles(r: u32) -> &'static [Triangle] {
    static WINDOWS: OnceLock<Vec<Vec<Triangle>>> = OnceLock::new();
    assert!(r <= MAX_WINDOW, "triangle window {r} exceeds {MAX_WINDOW}");
    &WINDOWS.get_or_init(|| (0..=MAX_WINDOW).map(window_triangles).collect())[r as usize]
}

fn dir(d: usize) -> GridCoord {
    Direction::new(d as i64).vector()
}

/// From the local frame of the sender to the frame of its bond `d`.
#[cfg(test)]
fn to_bond_frame(p: GridCoord, d: usize) -> GridCoord {
    p.rotate_ccw(((6 - d) % 6) as u8)
}

/// From the frame of the sender's bond to the local frame of the receiver,
/// which labels the bond `d`.
fn from_bond_frame(p: GridCoord, d: usize) -> GridCoord {
    dir(d) + p.rotate_ccw(((d + 3) % 6) as u8)
}

const CHUNK: usize = 64;

/// Sends one bit string of a fixed length per bond, in chunks of the
/// message primitive.
#[derive(Clone, Debug, Serialize)]
pub struct BitPipe {
    len: usize,
    sent: usize,
    outgoing: [Option<Vec<bool>>; 6],
    incoming: [Vec<bool>; 6],
    k: usize,
    current: Option<(MessageMachine, usize)>,
}

impl BitPipe {
    pub fn new(len: usize, outgoing: [Option<Vec<bool>>; 6], k: usize) -> Self {
        BitPipe { len, sent: 0, outgoing, incoming: Default::default(), k, current: None }
    }

    /// Sending rounds. The last bit is read one step later, in a step that
    /// may already start the next transfer.
    pub fn rounds(len: usize) -> u64 {
        len as u64
    }

    pub fn incoming(&self, d: usize) -> &[bool] {
        &self.incoming[d]
    }

    /// Returns true, without acting, once all bits have been read.
    pub fn step(&mut self, ctx: &mut StepCtx<'_>, cfg: PinConfig) -> bool {
        loop {
            if self.current.is_none() {
                if self.sent >= self.len {
                    return true;
                }
                let n = CHUNK.min(self.len - self.sent);
                let words = std::array::from_fn(|d| {
                    self.outgoing[d].as_ref().map(|bits| {
                        (0..n).filter(|i| bits[self.sent + i]).fold(0u64, |w, i| w | (1 << i))
                    })
                });
                self.current = Some((MessageMachine::new(n as u8, words, self.k), n));
            }
            let (m, n) = self.current.as_mut().unwrap();
            if !m.step_on(ctx, cfg) {
                return false;
            }
            let n = *n;
            for d in 0..6 {
                let w = m.received_from(d);
                self.incoming[d].extend((0..n).map(|i| w >> i & 1 == 1));
            }
            self.sent += n;
            self.current = None;
        }
    }
}

/// Gathers the occupied positions around an amoebot, in its local frame.
/// After `i` iterations it knows every amoebot within `i + 1` hops.
#[derive(Clone, Debug, Serialize)]
pub struct NeighborhoodGather {
    radius: u32,
    iter: u32,
    /// Occupied positions, including the origin.
    pub known: BTreeSet<GridCoord>,
    pipe: Option<BitPipe>,
}

impl NeighborhoodGather {
    pub fn new(iterations: u32, neighbors: u8) -> Self {
        let mut known = BTreeSet::from([GridCoord::ORIGIN]);
        known.extend((0..6).filter(|d| neighbors >> d & 1 == 1).map(dir));
        NeighborhoodGather { radius: iterations, iter: 0, known, pipe: None }
    }

    pub fn is_done(&self) -> bool {
        self.iter >= self.radius
    }

    /// Sending rounds of `iterations` iterations.
    pub fn rounds(iterations: u32) -> u64 {
        (1..=iterations).map(|i| BitPipe::rounds(cached_ball(i).len())).sum()
    }

    /// Returns true, without acting, once all iterations are complete.
    pub fn step(&mut self, ctx: &mut StepCtx<'_>) -> bool {
        loop {
            if self.is_done() {
                return true;
            }
            let window = cached_ball(self.iter + 1);
            if self.pipe.is_none() {
                let out = std::array::from_fn(|d| {
                    ctx.has_neighbor(d).then(|| {
                        window.iter().map(|e| self.known.contains(&e.rotate_ccw(d as u8))).collect()
                    })
                });
                self.pipe = Some(BitPipe::new(window.len(), out, ctx.pins_per_edge()));
            }
            if !self.pipe.as_mut().unwrap().step(ctx, PinConfig::EMPTY) {
                return false;
            }
            let pipe = self.pipe.take().unwrap();
            for d in (0..6).filter(|d| ctx.has_neighbor(*d)) {
                for (e, bit) in window.iter().zip(pipe.incoming(d)) {
                    if *bit {
                        self.known.insert(from_bond_frame(*e, d));
                    }
                }
            }
            self.iter += 1;
        }
    }
}

/// Standalone neighborhood gathering.
pub struct Gather {
    pub iterations: u32,
}

impl Protocol for Gather {
    type State = NeighborhoodGather;
    type Output = Vec<GridCoord>;

    fn init(&self, view: &InitView) -> NeighborhoodGather {
        NeighborhoodGather::new(self.iterations, view.neighbors)
    }

    fn step(&self, st: &mut NeighborhoodGather, ctx: &mut StepCtx<'_>) {
        if st.step(ctx) {
            ctx.clear_config();
        }
    }

    fn output(&self, st: &NeighborhoodGather) -> Option<Vec<GridCoord>> {
        st.is_done().then(|| st.known.iter().copied().collect())
    }
}

/// Gathers the triangles of a triangulation at one corner, separately for
/// each face that meets at the corner. Coordinates count triangle sides.
#[derive(Clone, Debug, Serialize)]
pub struct TriangleGather {
    window: u32,
    iterations: u32,
    iter: u32,
    /// Known triangles per face, relative to this corner.
    pub maps: Vec<BTreeSet<Triangle>>,
    /// Face of the side leaving along each bond.
    face_of: [Option<u8>; 6],
    /// Bonds on which a corner at the far end of the side answered.
    pub linked: u8,
    pipe: Option<BitPipe>,
}

impl TriangleGather {
    /// `faces` are the wedge masks of the faces at this corner (empty for
    /// amoebots that only relay); `sides` are the bonds that start a side.
    pub fn new(window: u32, iterations: u32, faces: &[u8], sides: u8) -> Self {
        let maps = faces
            .iter()
            .map(|m| (0..6).filter(|w| m >> w & 1 == 1).map(|w| wedge_face(GridCoord::ORIGIN, w)).collect())
            .collect();
        let face_of = std::array::from_fn(|d| {
            let adjacent = (1u8 << d) | (1 << ((d + 5) % 6));
            (sides >> d & 1 == 1).then(|| faces.iter().position(|m| m & adjacent != 0).map(|f| f as u8)).flatten()
        });
        TriangleGather { window, iterations, iter: 0, maps, face_of, linked: 0, pipe: None }
    }

    pub fn is_done(&self) -> bool {
        self.iter >= self.iterations
    }

    pub fn rounds(window: u32, iterations: u32) -> u64 {
        iterations as u64 * BitPipe::rounds(cached_triangles(window).len())
    }

    /// Returns true, without acting, once all iterations are complete.
    pub fn step(&mut self, ctx: &mut StepCtx<'_>, cfg: PinConfig) -> bool {
        loop {
            if self.is_done() {
                return true;
            }
            let table = cached_triangles(self.window);
            if self.pipe.is_none() {
                let out = std::array::from_fn(|d| {
                    self.face_of[d].map(|f| {
                        let map = &self.maps[f as usize];
                        table.iter().map(|t| map.contains(&t.map(|p| p.rotate_ccw(d as u8)))).collect()
                    })
                });
                self.pipe = Some(BitPipe::new(table.len(), out, ctx.pins_per_edge()));
            }
            if !self.pipe.as_mut().unwrap().step(ctx, cfg) {
                return false;
            }
            let pipe = self.pipe.take().unwrap();
            for d in 0..6 {
                let Some(f) = self.face_of[d] else { continue };
                if pipe.incoming(d).contains(&true) {
                    self.linked |= 1 << d;
                }
                for (t, bit) in table.iter().zip(pipe.incoming(d)) {
                    if *bit {
                        let t = t.map(|p| from_bond_frame(p, d));
                        if t.vertices().iter().all(|v| v.norm() <= self.window) {
                            self.maps[f as usize].insert(t);
                        }
                    }
                }
            }
            self.iter += 1;
        }
    }
}
