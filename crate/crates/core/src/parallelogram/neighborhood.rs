//! Neighborhood types and the geometric reference predicate.

use std::collections::HashSet;

use serde::Serialize;

use crate::grid::GridCoord;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum NeighborhoodType {
    /// A single neighbor.
    T1,
    /// Two contiguous neighbors.
    T2,
    /// Three contiguous neighbors.
    T3,
    /// Four contiguous neighbors.
    T4,
    /// All six neighbors.
    T5,
    /// Two opposing neighbors.
    T6,
    /// Everything else.
    T7,
}

impl NeighborhoodType {
    pub const ALL: [NeighborhoodType; 7] = [
        NeighborhoodType::T1,
        NeighborhoodType::T2,
        NeighborhoodType::T3,
        NeighborhoodType::T4,
        NeighborhoodType::T5,
        NeighborhoodType::T6,
        NeighborhoodType::T7,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn bit(self) -> u8 {
        1 << self.index()
    }
}

/// First direction of the single contiguous run in `mask`, counterclockwise.
pub fn run_start(mask: u8) -> Option<u8> {
    let has = |d: i32| mask & (1 << d.rem_euclid(6)) != 0;
    let starts: Vec<u8> = (0..6).filter(|d| has(*d) && !has(*d - 1)).map(|d| d as u8).collect();
    (starts.len() == 1).then(|| starts[0])
}

pub fn classify(mask: u8) -> NeighborhoodType {
    use NeighborhoodType::*;
    let mask = mask & 0x3f;
    let n = mask.count_ones();
    let contiguous = run_start(mask).is_some();
    match n {
        1 => T1,
        2 if contiguous => T2,
        2 if mask & (mask >> 3) != 0 => T6,
        3 if contiguous => T3,
        4 if contiguous => T4,
        6 => T5,
        _ => T7,
    }
}

/// Side lengths `(h, l)` with `h ≤ l`, counted in edges, if the nodes form
/// a parallelogram with sides along two grid axes. A straight line has
/// `h = 0`.
pub fn parallelogram_sides(coords: &[GridCoord]) -> Option<(u32, u32)> {
    if coords.is_empty() {
        return None;
    }
    let set: HashSet<GridCoord> = coords.iter().copied().collect();
    if set.len() != coords.len() {
        return None;
    }
    for r in 0..3u8 {
        // express every node in the basis (D_r, D_{r+1})
        let local: Vec<GridCoord> = coords.iter().map(|c| c.rotate_ccw((6 - r) % 6)).collect();
        let (qmin, qmax) = (local.iter().map(|c| c.q).min()?, local.iter().map(|c| c.q).max()?);
        let (rmin, rmax) = (local.iter().map(|c| c.r).min()?, local.iter().map(|c| c.r).max()?);
        let (w, hgt) = ((qmax - qmin) as u32, (rmax - rmin) as u32);
        if (w as usize + 1) * (hgt as usize + 1) == coords.len() {
            return Some((w.min(hgt), w.max(hgt)));
        }
    }
    None
}
