//! Geometry of the infinite regular triangular grid.
//!
//! Nodes use axial `(q, r)` coordinates. The six edge directions are indexed
//! counterclockwise starting from `(+1, 0)`.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Axial position on the triangular grid.
#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
pub struct GridCoord {
    pub q: i32,
    pub r: i32,
}

impl GridCoord {
    pub const ORIGIN: GridCoord = GridCoord { q: 0, r: 0 };

    pub const fn new(q: i32, r: i32) -> Self {
        Self { q, r }
    }

    pub fn neighbor(self, d: Direction) -> Self {
        self + d.vector()
    }

    pub fn neighbors(self) -> impl Iterator<Item = GridCoord> {
        Direction::ALL.into_iter().map(move |d| self.neighbor(d))
    }

    pub fn scale(self, s: i32) -> Self {
        Self::new(self.q * s, self.r * s)
    }

    /// Rotates the vector counterclockwise about the origin by `steps` × 60°.
    pub fn rotate_ccw(self, steps: u8) -> Self {
        let mut c = self;
        for _ in 0..steps % 6 {
            c = GridCoord::new(-c.r, c.q + c.r);
        }
        c
    }

    /// Mirror image across the axis through direction 0.
    pub fn reflect(self) -> Self {
        GridCoord::new(self.q + self.r, -self.r)
    }

    /// Length of the vector in grid steps.
    pub fn norm(self) -> u32 {
        ((self.q.abs() + self.r.abs() + (self.q + self.r).abs()) / 2) as u32
    }

    /// Returns `Some(d)` if the vector equals one of the six unit directions.
    pub fn as_direction(self) -> Option<Direction> {
        Direction::ALL.into_iter().find(|d| d.vector() == self)
    }
}

impl Add for GridCoord {
    type Output = GridCoord;
    fn add(self, o: GridCoord) -> GridCoord {
        GridCoord::new(self.q + o.q, self.r + o.r)
    }
}

impl Sub for GridCoord {
    type Output = GridCoord;
    fn sub(self, o: GridCoord) -> GridCoord {
        GridCoord::new(self.q - o.q, self.r - o.r)
    }
}

impl Neg for GridCoord {
    type Output = GridCoord;
    fn neg(self) -> GridCoord {
        GridCoord::new(-self.q, -self.r)
    }
}

impl fmt::Display for GridCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.q, self.r)
    }
}

const DIRECTION_VECTORS: [GridCoord; 6] = [
    GridCoord::new(1, 0),
    GridCoord::new(0, 1),
    GridCoord::new(-1, 1),
    GridCoord::new(-1, 0),
    GridCoord::new(0, -1),
    GridCoord::new(1, -1),
];

/// One of the six edge directions, counterclockwise from `(+1, 0)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Direction(u8);

impl Direction {
    pub const ALL: [Direction; 6] = [
        Direction(0),
        Direction(1),
        Direction(2),
        Direction(3),
        Direction(4),
        Direction(5),
    ];

    /// Builds a direction from any integer, reducing modulo 6.
    pub fn new(index: i64) -> Self {
        Direction(index.rem_euclid(6) as u8)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn vector(self) -> GridCoord {
        DIRECTION_VECTORS[self.0 as usize]
    }

    pub fn opposite(self) -> Self {
        Direction((self.0 + 3) % 6)
    }

    /// Axis shared by a direction and its opposite, in `0..3`.
    pub fn axis(self) -> u8 {
        self.0 % 3
    }

    pub fn rotate_ccw(self, steps: i64) -> Self {
        Direction::new(self.0 as i64 + steps)
    }

    pub fn rotate_cw(self, steps: i64) -> Self {
        Direction::new(self.0 as i64 - steps)
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "D{}", self.0)
    }
}

pub fn neighbor(c: GridCoord, d: Direction) -> GridCoord {
    c.neighbor(d)
}

/// Clockwise rotation of a direction; clockwise decreases the index.
pub fn rotate_cw(d: Direction, steps: u32) -> Direction {
    d.rotate_cw(steps as i64)
}

pub fn hex_distance(a: GridCoord, b: GridCoord) -> u32 {
    (a - b).norm()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Chirality {
    Ccw,
    Cw,
}

impl Chirality {
    pub fn flipped(self) -> Self {
        match self {
            Chirality::Ccw => Chirality::Cw,
            Chirality::Cw => Chirality::Ccw,
        }
    }
}

/// How an amoebot's local labels relate to the global frame.
///
/// `offset` is the global direction of local label 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Orientation {
    pub chirality: Chirality,
    pub offset: u8,
}

impl Default for Orientation {
    fn default() -> Self {
        Orientation::CANONICAL
    }
}

impl Orientation {
    pub const CANONICAL: Orientation = Orientation {
        chirality: Chirality::Ccw,
        offset: 0,
    };

    pub fn new(chirality: Chirality, offset: u8) -> Self {
        Self {
            chirality,
            offset: offset % 6,
        }
    }

    pub fn local_to_global(self, local: Direction) -> Direction {
        match self.chirality {
            Chirality::Ccw => Direction::new(self.offset as i64 + local.0 as i64),
            Chirality::Cw => Direction::new(self.offset as i64 - local.0 as i64),
        }
    }

    pub fn global_to_local(self, global: Direction) -> Direction {
        match self.chirality {
            Chirality::Ccw => Direction::new(global.0 as i64 - self.offset as i64),
            Chirality::Cw => Direction::new(self.offset as i64 - global.0 as i64),
        }
    }

    /// Maps a vector expressed in local labels to the global frame.
    pub fn vector_to_global(self, v: GridCoord) -> GridCoord {
        match self.chirality {
            Chirality::Ccw => v.rotate_ccw(self.offset),
            Chirality::Cw => v.reflect().rotate_ccw(self.offset),
        }
    }

    pub fn vector_to_local(self, v: GridCoord) -> GridCoord {
        let back = (6 - self.offset % 6) % 6;
        match self.chirality {
            Chirality::Ccw => v.rotate_ccw(back),
            Chirality::Cw => v.rotate_ccw(back).reflect(),
        }
    }

    /// Compass turned clockwise by `steps` × 60° as seen from the global frame.
    pub fn rotated_cw(self, steps: u8) -> Self {
        Orientation::new(self.chirality, ((self.offset as i32 - steps as i32).rem_euclid(6)) as u8)
    }

    /// Same compass direction 0, mirrored labeling.
    pub fn flipped(self) -> Self {
        Orientation::new(self.chirality.flipped(), self.offset)
    }
}

pub fn local_to_global(o: Orientation, local: Direction) -> Direction {
    o.local_to_global(local)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::{HashMap, VecDeque};

    #[test]
    fn neighbor_examples() {
        assert_eq!(neighbor(GridCoord::new(0, 0), Direction::new(0)), GridCoord::new(1, 0));
        assert_eq!(neighbor(GridCoord::new(2, -1), Direction::new(3)), GridCoord::new(1, -1));
    }

    #[test]
    fn opposite_directions_cancel() {
        for d in Direction::ALL {
            assert_eq!(d.opposite().vector(), -d.vector());
            assert_eq!(d.axis(), d.opposite().axis());
        }
        let c = GridCoord::new(5, -7);
        for d in Direction::ALL {
            assert_eq!(neighbor(neighbor(c, d), d.opposite()), c);
        }
    }

    #[test]
    fn neighbors_are_distinct_and_adjacent() {
        let c = GridCoord::new(-3, 4);
        let ns: Vec<_> = c.neighbors().collect();
        for (i, a) in ns.iter().enumerate() {
            assert_eq!(hex_distance(*a, c), 1);
            for b in &ns[i + 1..] {
                assert_ne!(a, b);
            }
        }
    }

    #[test]
    fn rotate_cw_examples() {
        assert_eq!(rotate_cw(Direction::new(1), 1), Direction::new(0));
        assert_eq!(rotate_cw(Direction::new(0), 6), Direction::new(0));
        for d in Direction::ALL {
            for a in 0..6 {
                for b in 0..6 {
                    assert_eq!(rotate_cw(rotate_cw(d, a), b), rotate_cw(d, (a + b) % 6));
                }
            }
        }
    }

    #[test]
    fn local_to_global_examples() {
        let o = |c, off| Orientation::new(c, off);
        assert_eq!(local_to_global(o(Chirality::Ccw, 0), Direction::new(2)), Direction::new(2));
        assert_eq!(local_to_global(o(Chirality::Cw, 0), Direction::new(1)), Direction::new(5));
        assert_eq!(local_to_global(o(Chirality::Ccw, 4), Direction::new(3)), Direction::new(1));
        // every orientation labels the six edges bijectively
        for chir in [Chirality::Ccw, Chirality::Cw] {
            for off in 0..6 {
                let or = o(chir, off);
                let mut seen = [false; 6];
                for l in Direction::ALL {
                    let g = or.local_to_global(l);
                    assert!(!seen[g.index()]);
                    seen[g.index()] = true;
                    assert_eq!(or.global_to_local(g), l);
                    assert_eq!(or.vector_to_global(l.vector()), g.vector());
                    assert_eq!(or.vector_to_local(g.vector()), l.vector());
                }
            }
        }
    }

    #[test]
    fn clockwise_labeling_reverses_cyclic_order() {
        for off in 0..6 {
            let ccw = Orientation::new(Chirality::Ccw, off);
            let cw = Orientation::new(Chirality::Cw, off);
            for l in Direction::ALL {
                let step_ccw = ccw.local_to_global(l.rotate_ccw(1)).index() as i64
                    - ccw.local_to_global(l).index() as i64;
                let step_cw = cw.local_to_global(l.rotate_ccw(1)).index() as i64
                    - cw.local_to_global(l).index() as i64;
                assert_eq!(step_ccw.rem_euclid(6), 1);
                assert_eq!(step_cw.rem_euclid(6), 5);
            }
        }
    }

    #[test]
    fn hex_distance_examples() {
        assert_eq!(hex_distance(GridCoord::new(0, 0), GridCoord::new(0, 0)), 0);
        assert_eq!(hex_distance(GridCoord::new(0, 0), GridCoord::new(1, 0)), 1);
        assert_eq!(hex_distance(GridCoord::new(0, 0), GridCoord::new(2, -3)), 3);
    }

    fn bfs_distances(radius: i32) -> HashMap<GridCoord, u32> {
        let mut dist = HashMap::new();
        let mut queue = VecDeque::new();
        dist.insert(GridCoord::ORIGIN, 0);
        queue.push_back(GridCoord::ORIGIN);
        while let Some(c) = queue.pop_front() {
            let d = dist[&c];
            for n in c.neighbors() {
                if n.q.abs() > 2 * radius || n.r.abs() > 2 * radius {
                    continue;
                }
                if !dist.contains_key(&n) {
                    dist.insert(n, d + 1);
                    queue.push_back(n);
                }
            }
        }
        dist
    }

    #[test]
    fn hex_distance_matches_bfs() {
        use rand::{Rng, SeedableRng};
        let dist = bfs_distances(20);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let a = GridCoord::new(rng.gen_range(-20..=20), rng.gen_range(-20..=20));
            let b = GridCoord::new(rng.gen_range(-20..=20), rng.gen_range(-20..=20));
            // BFS from origin applies after translating by -b
            assert_eq!(hex_distance(a, b), dist[&(a - b)]);
        }
    }

    proptest! {
        #[test]
        fn distance_is_a_metric(a in (-50i32..50, -50i32..50), b in (-50i32..50, -50i32..50), c in (-50i32..50, -50i32..50)) {
            let (a, b, c) = (GridCoord::new(a.0, a.1), GridCoord::new(b.0, b.1), GridCoord::new(c.0, c.1));
            prop_assert_eq!(hex_distance(a, b), hex_distance(b, a));
            prop_assert_eq!(hex_distance(a, b) == 0, a == b);
            prop_assert!(hex_distance(a, c) <= hex_distance(a, b) + hex_distance(b, c));
        }

        #[test]
        fn rotation_preserves_norm(q in -30i32..30, r in -30i32..30, s in 0u8..6) {
            let v = GridCoord::new(q, r);
            prop_assert_eq!(v.rotate_ccw(s).norm(), v.norm());
            prop_assert_eq!(v.reflect().norm(), v.norm());
            prop_assert_eq!(v.rotate_ccw(s).rotate_ccw(6 - s), v);
        }
    }
}
