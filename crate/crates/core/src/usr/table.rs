//! Lookup tables held in every amoebot's finite state: boundary labels for
//! 2-neighborhoods, and the small-scale representations of the shape.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::OnceLock;

use serde::Serialize;

use super::gather::ball;
use crate::grid::{Direction, GridCoord};
use crate::shapes::{boundary_edges, representation, wedge_face, Shape, Transformation, Triangle};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum BoundaryClass {
    Corner,
    Edge,
    Interior,
}

/// What a 2-neighborhood tells an amoebot about the shape around it, in its
/// local frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct BoundaryLabel {
    pub corner: bool,
    /// Bonds that are boundary edges.
    pub boundary: u8,
    /// Wedges `w` (between directions `w` and `w + 1`) inside the shape.
    pub inside: u8,
}

impl BoundaryLabel {
    pub fn class(&self) -> BoundaryClass {
        if self.corner {
            BoundaryClass::Corner
        } else if self.boundary != 0 {
            BoundaryClass::Edge
        } else {
            BoundaryClass::Interior
        }
    }

    fn rotated(self, r: u8) -> BoundaryLabel {
        BoundaryLabel { corner: self.corner, boundary: rotate_mask(self.boundary, r), inside: rotate_mask(self.inside, r) }
    }
}

pub fn rotate_mask(m: u8, r: u8) -> u8 {
    let r = r % 6;
    ((m << r) | (m >> (6 - r))) & 0x3f
}

/// Occupancy of the 18 nodes within distance 2, in [`ball`] order.
pub fn pattern_key(occupied: impl Fn(GridCoord) -> bool) -> u32 {
    key_in(&ball(2), occupied)
}

fn key_in(b2: &[GridCoord], occupied: impl Fn(GridCoord) -> bool) -> u32 {
    b2.iter().enumerate().filter(|(_, p)| occupied(**p)).fold(0, |k, (i, _)| k | (1 << i))
}

/// Key of the pattern rotated counterclockwise by `r` steps.
fn rotate_key(key: u32, perm: &[usize]) -> u32 {
    (0..perm.len()).filter(|i| key >> i & 1 == 1).fold(0, |k, i| k | (1 << perm[i]))
}

/// Boundary labels of every 2-neighborhood that occurs in a representation
/// with scale at least 4.
#[derive(Debug)]
pub struct BoundaryTable {
    map: HashMap<u32, BoundaryLabel>,
    /// Patterns seen with two different labels; they are left out.
    pub conflicts: usize,
}

/// Scales enumerated by [`BoundaryTable::universal`].
pub const TABLE_SCALES: std::ops::RangeInclusive<i32> = 4..=9;

impl BoundaryTable {
    pub fn universal() -> &'static BoundaryTable {
        static TABLE: OnceLock<BoundaryTable> = OnceLock::new();
        TABLE.get_or_init(|| BoundaryTable::build(TABLE_SCALES))
    }

    /// Enumerates the up triangle `Δ` of side `σ` at the origin together
    /// with every subset of the 12 faces sharing a vertex with it, and
    /// labels each node of `Δ`. Every node of a representation lies in some
    /// face, and its 2-neighborhood lies in that face's star, so this covers
    /// all representations up to rotation.
    pub fn build(scales: impl IntoIterator<Item = i32>) -> BoundaryTable {
        let b2 = ball(2);
        let perms: Vec<Vec<usize>> = (0..6u8)
            .map(|r| b2.iter().map(|p| b2.iter().position(|q| *q == p.rotate_ccw(r)).unwrap()).collect())
            .collect();
        let mut seen: HashMap<u32, Option<BoundaryLabel>> = HashMap::new();
        for s in scales {
            let center = Triangle::new(GridCoord::ORIGIN, crate::shapes::Pointing::Up, s);
            let star: Vec<Triangle> = center
                .vertices()
                .iter()
                .flat_map(|v| (0..6).map(move |w| wedge_face(GridCoord::ORIGIN, w).map(|p| *v + p.scale(s))))
                .filter(|t| *t != center)
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            debug_assert_eq!(star.len(), 12);
            let inner = center.nodes();
            for subset in 0u32..1 << star.len() {
                let faces: Vec<Triangle> =
                    std::iter::once(center).chain((0..star.len()).filter(|i| subset >> i & 1 == 1).map(|i| star[i])).collect();
                for (key, label) in label_nodes(&b2, &faces, &inner) {
                    for r in 0..6u8 {
                        let rk = rotate_key(key, &perms[r as usize]);
                        let rl = label.rotated(r);
                        seen.entry(rk)
                            .and_modify(|e| {
                                if *e != Some(rl) {
                                    *e = None;
                                }
                            })
                            .or_insert(Some(rl));
                    }
                }
            }
        }
        let conflicts = seen.values().filter(|v| v.is_none()).count();
        let map = seen.into_iter().filter_map(|(k, v)| v.map(|v| (k, v))).collect();
        BoundaryTable { map, conflicts }
    }

    pub fn classify(&self, key: u32) -> Option<BoundaryLabel> {
        self.map.get(&key).copied()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Pattern keys and labels of the nodes in `at`, for the structure formed
/// by `faces`.
fn label_nodes(b2: &[GridCoord], faces: &[Triangle], at: &[GridCoord]) -> Vec<(u32, BoundaryLabel)> {
    let units: BTreeSet<Triangle> = faces.iter().flat_map(|f| f.unit_faces()).collect();
    let nodes: HashSet<GridCoord> = faces.iter().flat_map(|f| f.nodes()).collect();
    let boundary = boundary_edges(&units);
    at.iter()
        .map(|&p| {
            let key = key_in(b2, |q| nodes.contains(&(p + q)));
            let mut b = 0u8;
            let mut inside = 0u8;
            for d in 0..6 {
                let n = p + Direction::new(d as i64).vector();
                if boundary.contains(&crate::shapes::edge(p, n)) {
                    b |= 1 << d;
                }
                if units.contains(&wedge_face(p, d)) {
                    inside |= 1 << d;
                }
            }
            let straight = (0..3).any(|d| b == (1 << d) | (1 << (d + 3)));
            (key, BoundaryLabel { corner: b != 0 && !straight, boundary: b, inside })
        })
        .collect()
}

/// Small-scale representations of the shape, as node sets relative to each
/// of their nodes.
#[derive(Clone, Debug)]
pub struct SmallScale {
    patterns: HashSet<Vec<GridCoord>>,
    /// Largest hop distance between two nodes of any stored representation.
    pub diameter: u32,
}

/// Representations with `σ` below this are matched directly.
pub const SMALL_SCALE_LIMIT: i32 = 4;

impl SmallScale {
    pub fn new(shape: &Shape) -> SmallScale {
        let mut patterns = HashSet::new();
        let mut diameter = 0;
        for s in 1..SMALL_SCALE_LIMIT {
            for rot in 0..6 {
                let rep = representation(shape, &Transformation::new(GridCoord::ORIGIN, rot, s));
                let set: HashSet<GridCoord> = rep.iter().copied().collect();
                for &a in &rep {
                    diameter = diameter.max(eccentricity(&set, a));
                    let mut rel: Vec<GridCoord> = rep.iter().map(|p| *p - a).collect();
                    rel.sort();
                    patterns.insert(rel);
                }
            }
        }
        SmallScale { patterns, diameter }
    }

    /// `known` must be sorted and hold every node within the gathering
    /// radius, which has to exceed [`diameter`](Self::diameter).
    pub fn matches(&self, known: &[GridCoord]) -> bool {
        self.patterns.contains(known)
    }
}

fn eccentricity(set: &HashSet<GridCoord>, from: GridCoord) -> u32 {
    let mut seen = HashSet::from([from]);
    let mut frontier = vec![from];
    let mut depth = 0;
    loop {
        let next: Vec<GridCoord> = frontier
            .iter()
            .flat_map(|p| p.neighbors())
            .filter(|q| set.contains(q) && seen.insert(*q))
            .collect();
        if next.is_empty() {
            return depth;
        }
        frontier = next;
        depth += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes::Pointing;

    #[test]
    fn universal_table_has_no_conflicts() {
        let t = BoundaryTable::universal();
        assert_eq!(t.conflicts, 0);
        assert!(!t.is_empty());
    }

    #[test]
    fn patterns_stabilize_with_scale() {
        let a: HashSet<u32> = BoundaryTable::build(4..=8).map.keys().copied().collect();
        let b: HashSet<u32> = BoundaryTable::build(4..=12).map.keys().copied().collect();
        assert_eq!(a, b);
    }

    #[test]
    fn interior_and_straight_edge() {
        let t = BoundaryTable::universal();
        let full = t.classify(pattern_key(|_| true)).unwrap();
        assert_eq!(full.class(), BoundaryClass::Interior);
        assert_eq!(full.inside, 0x3f);
        // lower half plane r ≤ 0: a straight boundary along axis 0
        let edge = t.classify(pattern_key(|p| p.r <= 0)).unwrap();
        assert_eq!(edge.class(), BoundaryClass::Edge);
        assert_eq!(edge.boundary, 0b001001);
        assert_eq!(edge.inside, 0b111000);
    }

    #[test]
    fn corners_have_one_two_four_or_five_wedges() {
        let t = BoundaryTable::universal();
        for w in 1..6u32 {
            // w contiguous wedges starting at 0, far from other corners
            let inside = |p: GridCoord| {
                (0..w as usize).any(|i| {
                    let (a, b) = (Direction::new(i as i64).vector(), Direction::new(i as i64 + 1).vector());
                    // p = x·a + y·b with x, y ≥ 0
                    (0..=2).any(|x| (0..=2 - x).any(|y| a.scale(x) + b.scale(y) == p))
                })
            };
            let l = t.classify(pattern_key(inside)).unwrap();
            assert_eq!(l.class() == BoundaryClass::Corner, w != 3, "w = {w}");
            assert_eq!(l.inside.count_ones(), w);
        }
    }

    #[test]
    fn thin_structures_are_unclassifiable() {
        let t = BoundaryTable::universal();
        // a straight line of nodes
        assert!(t.classify(pattern_key(|p| p.r == 0)).is_none());
        // a unit triangle
        let tri = Triangle::new(GridCoord::ORIGIN, Pointing::Up, 1).nodes();
        assert!(t.classify(pattern_key(|p| tri.contains(&p))).is_none());
    }

    #[test]
    fn small_scale_matches_own_representations_only() {
        let shape = Shape::triangle();
        let ss = SmallScale::new(&shape);
        let rep = representation(&shape, &Transformation::new(GridCoord::new(3, -1), 2, 3));
        let a = rep[4];
        let mut rel: Vec<GridCoord> = rep.iter().map(|p| *p - a).collect();
        rel.sort();
        assert!(ss.matches(&rel));
        rel.pop();
        assert!(!ss.matches(&rel));
        let big = representation(&shape, &Transformation::scaled(4));
        let rel: Vec<GridCoord> = big.iter().map(|p| *p - big[0]).collect();
        assert!(!ss.matches(&rel));
        assert_eq!(ss.diameter, 3);
    }
}
