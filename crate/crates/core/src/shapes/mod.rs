//! Shapes as sets of triangular faces, their transformations and lattice
//! representations.

mod minimal;
mod triangulation;

pub use minimal::is_minimal;
pub use triangulation::{
    boundary_corners, boundary_edges, edge, reference_triangulation, triangulation_iteration_bound, AxisLines, Edge,
    Triangulation,
};

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Direction, GridCoord};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pointing {
    Up,
    Down,
}

/// A lattice triangle of side `size`.
///
/// `Up` at `a` has vertices `a`, `a + s·D0`, `a + s·D1`; `Down` at `a` has
/// vertices `a + s·D0`, `a + s·D1`, `a + s·(D0 + D1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Triangle {
    pub anchor: GridCoord,
    pub pointing: Pointing,
    pub size: i32,
}

const D0: GridCoord = GridCoord::new(1, 0);
const D1: GridCoord = GridCoord::new(0, 1);

impl Triangle {
    pub fn new(anchor: GridCoord, pointing: Pointing, size: i32) -> Self {
        Triangle { anchor, pointing, size }
    }

    pub fn vertices(&self) -> [GridCoord; 3] {
        let (a, s) = (self.anchor, self.size);
        match self.pointing {
            Pointing::Up => [a, a + D0.scale(s), a + D1.scale(s)],
            Pointing::Down => [a + D0.scale(s), a + D1.scale(s), a + D0.scale(s) + D1.scale(s)],
        }
    }

    /// Identifies the lattice triangle with the given corners, if any.
    pub fn from_vertices(v: [GridCoord; 3]) -> Option<Triangle> {
        let s = (v[0] - v[1]).norm() as i32;
        if s == 0 || (v[1] - v[2]).norm() as i32 != s || (v[0] - v[2]).norm() as i32 != s {
            return None;
        }
        let mut sorted = v;
        sorted.sort();
        for x in v {
            for p in [Pointing::Up, Pointing::Down] {
                let anchor = match p {
                    Pointing::Up => x,
                    Pointing::Down => x - D0.scale(s) - D1.scale(s),
                };
                let t = Triangle::new(anchor, p, s);
                let mut tv = t.vertices();
                tv.sort();
                if tv == sorted {
                    return Some(t);
                }
            }
        }
        None
    }

    /// All lattice nodes on or inside the triangle.
    pub fn nodes(&self) -> Vec<GridCoord> {
        let s = self.size;
        let mut out = Vec::with_capacity(((s + 1) * (s + 2) / 2) as usize);
        for i in 0..=s {
            for j in 0..=s - i {
                let off = D0.scale(i) + D1.scale(j);
                out.push(match self.pointing {
                    Pointing::Up => self.anchor + off,
                    Pointing::Down => self.anchor + D0.scale(s) + D1.scale(s) - off,
                });
            }
        }
        out
    }

    /// The unit faces covering the triangle.
    pub fn unit_faces(&self) -> Vec<Triangle> {
        let s = self.size;
        let mut out = Vec::with_capacity((s * s) as usize);
        for i in 0..s {
            for j in 0..s - i {
                let off = D0.scale(i) + D1.scale(j);
                match self.pointing {
                    Pointing::Up => {
                        out.push(Triangle::new(self.anchor + off, Pointing::Up, 1));
                        if i + j + 1 < s {
                            out.push(Triangle::new(self.anchor + off, Pointing::Down, 1));
                        }
                    }
                    Pointing::Down => {
                        let top = self.anchor + D0.scale(s - 1) + D1.scale(s - 1);
                        out.push(Triangle::new(top - off, Pointing::Down, 1));
                        if i + j + 1 < s {
                            out.push(Triangle::new(top - off, Pointing::Up, 1));
                        }
                    }
                }
            }
        }
        out
    }

    /// Triangles of the same size sharing a side.
    pub fn neighbors(&self) -> [Triangle; 3] {
        let (a, s) = (self.anchor, self.size);
        match self.pointing {
            Pointing::Up => [
                Triangle::new(a, Pointing::Down, s),
                Triangle::new(a - D1.scale(s), Pointing::Down, s),
                Triangle::new(a - D0.scale(s), Pointing::Down, s),
            ],
            Pointing::Down => [
                Triangle::new(a, Pointing::Up, s),
                Triangle::new(a + D1.scale(s), Pointing::Up, s),
                Triangle::new(a + D0.scale(s), Pointing::Up, s),
            ],
        }
    }

    pub fn map(&self, f: impl Fn(GridCoord) -> GridCoord) -> Triangle {
        let [a, b, c] = self.vertices();
        Triangle::from_vertices([f(a), f(b), f(c)]).expect("lattice maps preserve triangles")
    }
}

/// The unit triangle in wedge `w` at `c`, between directions `w` and `w + 1`.
pub fn wedge_face(c: GridCoord, w: usize) -> Triangle {
    let a = Direction::new(w as i64).vector();
    let b = Direction::new(w as i64 + 1).vector();
    Triangle::from_vertices([c, c + a, c + b]).unwrap()
}

/// Translation, counterclockwise rotation and isotropic scaling, applied as
/// `p ↦ translation + rotate(scale · p)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Transformation {
    pub translation: GridCoord,
    pub rotation: u8,
    pub scale: i32,
}

impl Transformation {
    pub fn new(translation: GridCoord, rotation: u8, scale: i32) -> Self {
        Transformation { translation, rotation: rotation % 6, scale }
    }

    pub fn scaled(scale: i32) -> Self {
        Self::new(GridCoord::ORIGIN, 0, scale)
    }

    pub fn apply(&self, p: GridCoord) -> GridCoord {
        self.translation + p.scale(self.scale).rotate_ccw(self.rotation)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Transformation) -> Transformation {
        Transformation {
            translation: self.apply(other.translation),
            rotation: (self.rotation + other.rotation) % 6,
            scale: self.scale * other.scale,
        }
    }
}

/// A finite, connected set of unit faces.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Shape {
    faces: BTreeSet<Triangle>,
}

impl Shape {
    pub fn new(faces: impl IntoIterator<Item = (GridCoord, Pointing)>) -> Result<Shape> {
        let faces: BTreeSet<Triangle> = faces.into_iter().map(|(c, p)| Triangle::new(c, p, 1)).collect();
        if faces.is_empty() {
            return Err(Error::InvalidConfig("a shape needs at least one face".into()));
        }
        let s = Shape { faces };
        if !s.is_connected() {
            return Err(Error::ShapeDisconnected);
        }
        Ok(s)
    }

    pub fn triangle() -> Shape {
        Shape::new([(GridCoord::ORIGIN, Pointing::Up)]).unwrap()
    }

    pub fn faces(&self) -> impl Iterator<Item = &Triangle> {
        self.faces.iter()
    }

    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    fn is_connected(&self) -> bool {
        triangles_connected(&self.faces)
    }

    /// Faces of `T(S)` as triangles of side `σ`.
    pub fn transformed(&self, t: &Transformation) -> Vec<Triangle> {
        self.faces.iter().map(|f| f.map(|p| t.apply(p))).collect()
    }

    /// Unit faces covering `T(S)`.
    pub fn unit_faces(&self, t: &Transformation) -> BTreeSet<Triangle> {
        self.transformed(t).iter().flat_map(|f| f.unit_faces()).collect()
    }

    /// Parses one face per line, `q r U|D`; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Shape> {
        let mut faces = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| Error::Parse { line: i + 1, msg: msg.to_string() };
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(err("expected `q r U|D`"));
            }
            let q = parts[0].parse().map_err(|_| err("bad q"))?;
            let r = parts[1].parse().map_err(|_| err("bad r"))?;
            let p = match parts[2] {
                "U" | "u" => Pointing::Up,
                "D" | "d" => Pointing::Down,
                _ => return Err(err("pointing must be U or D")),
            };
            faces.push((GridCoord::new(q, r), p));
        }
        Shape::new(faces)
    }

    pub fn read(path: &Path) -> Result<Shape> {
        Shape::parse(&std::fs::read_to_string(path)?)
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.faces {
            let p = if t.pointing == Pointing::Up { "U" } else { "D" };
            writeln!(f, "{} {} {}", t.anchor.q, t.anchor.r, p)?;
        }
        Ok(())
    }
}

/// True if the triangles (all of one size) are connected through shared sides.
pub fn triangles_connected(faces: &BTreeSet<Triangle>) -> bool {
    let Some(first) = faces.iter().next() else {
        return true;
    };
    let mut seen = HashSet::from([*first]);
    let mut q = VecDeque::from([*first]);
    while let Some(t) = q.pop_front() {
        for n in t.neighbors() {
            if faces.contains(&n) && seen.insert(n) {
                q.push_back(n);
            }
        }
    }
    seen.len() == faces.len()
}

/// `V(T(S))`: all nodes on a vertex, on an edge or inside the transformed
/// shape, in sorted order.
pub fn representation(shape: &Shape, t: &Transformation) -> Vec<GridCoord> {
    let set: BTreeSet<GridCoord> = shape.transformed(t).iter().flat_map(|f| f.nodes()).collect();
    set.into_iter().collect()
}

/// True if `coords` is `V(T(S))` for some rotation, translation and scale.
pub fn is_representation(shape: &Shape, coords: &[GridCoord]) -> bool {
    let mut sorted = coords.to_vec();
    sorted.sort();
    sorted.dedup();
    if sorted.len() != coords.len() || sorted.is_empty() {
        return false;
    }
    for sigma in 1.. {
        let mut smallest = usize::MAX;
        for rot in 0..6 {
            let rep = representation(shape, &Transformation::new(GridCoord::ORIGIN, rot, sigma));
            smallest = smallest.min(rep.len());
            if rep.len() == sorted.len() {
                let shift = sorted[0] - rep[0];
                if rep.iter().zip(&sorted).all(|(a, b)| *a + shift == *b) {
                    return true;
                }
            }
        }
        if smallest > sorted.len() {
            return false;
        }
    }
    unreachable!()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn representation_oracle() {
        let s = Shape::new([(GridCoord::ORIGIN, Pointing::Up), (GridCoord::ORIGIN, Pointing::Down)]).unwrap();
        for sigma in 1..5 {
            for rot in 0..6 {
                let mut rep = representation(&s, &Transformation::new(GridCoord::new(-2, 7), rot, sigma));
                assert!(is_representation(&s, &rep));
                rep.reverse();
                assert!(is_representation(&s, &rep));
                rep.pop();
                assert!(!is_representation(&s, &rep));
            }
        }
        let tri = representation(&Shape::triangle(), &Transformation::scaled(3));
        assert!(!is_representation(&s, &tri));
        assert!(!is_representation(&s, &[]));
    }
    use proptest::prelude::*;

    pub(crate) fn trapezoid() -> Shape {
        Shape::new([
            (GridCoord::new(0, 0), Pointing::Up),
            (GridCoord::new(0, 0), Pointing::Down),
            (GridCoord::new(1, 0), Pointing::Up),
        ])
        .unwrap()
    }

    #[test]
    fn vertices_round_trip() {
        for s in 1..4 {
            for q in -2..3 {
                for r in -2..3 {
                    for p in [Pointing::Up, Pointing::Down] {
                        let t = Triangle::new(GridCoord::new(q, r), p, s);
                        assert_eq!(Triangle::from_vertices(t.vertices()), Some(t));
                    }
                }
            }
        }
    }

    #[test]
    fn node_counts() {
        let tri = Shape::triangle();
        assert_eq!(representation(&tri, &Transformation::scaled(1)).len(), 3);
        assert_eq!(representation(&tri, &Transformation::scaled(2)).len(), 6);
        // half-plane oracle for a size-σ up triangle
        for sigma in 1..7 {
            let rep = representation(&tri, &Transformation::scaled(sigma));
            let expect: Vec<GridCoord> = {
                let mut v = Vec::new();
                for q in -1..=sigma + 1 {
                    for r in -1..=sigma + 1 {
                        if q >= 0 && r >= 0 && q + r <= sigma {
                            v.push(GridCoord::new(q, r));
                        }
                    }
                }
                v.sort();
                v
            };
            assert_eq!(rep, expect);
        }
        assert_eq!(representation(&trapezoid(), &Transformation::scaled(1)).len(), 5);
        assert_eq!(representation(&trapezoid(), &Transformation::scaled(2)).len(), 12);
    }

    #[test]
    fn unit_faces_tile_the_triangle() {
        for s in 1..6 {
            for p in [Pointing::Up, Pointing::Down] {
                let t = Triangle::new(GridCoord::new(2, -1), p, s);
                let faces = t.unit_faces();
                assert_eq!(faces.len(), (s * s) as usize);
                let nodes: HashSet<GridCoord> = t.nodes().into_iter().collect();
                for f in &faces {
                    assert!(f.vertices().iter().all(|v| nodes.contains(v)));
                }
                let set: BTreeSet<Triangle> = faces.into_iter().collect();
                assert_eq!(set.len(), (s * s) as usize);
            }
        }
    }

    #[test]
    fn wedges_match_neighbors() {
        let c = GridCoord::new(0, 0);
        assert_eq!(wedge_face(c, 0), Triangle::new(c, Pointing::Up, 1));
        assert_eq!(wedge_face(c, 1), Triangle::new(GridCoord::new(-1, 0), Pointing::Down, 1));
        assert_eq!(wedge_face(c, 3), Triangle::new(GridCoord::new(-1, -1), Pointing::Down, 1));
        for w in 0..6 {
            let f = wedge_face(c, w);
            assert!(f.neighbors().contains(&wedge_face(c, (w + 1) % 6)));
        }
    }

    #[test]
    fn parse_and_validate() {
        let s = Shape::parse("# trapezoid\n0 0 U\n0 0 D\n1 0 U\n").unwrap();
        assert_eq!(s, trapezoid());
        assert_eq!(Shape::parse(&s.to_string()).unwrap(), s);
        assert!(matches!(Shape::parse("0 0 U\n3 3 U\n"), Err(Error::ShapeDisconnected)));
        assert!(matches!(Shape::parse("0 0 X\n"), Err(Error::Parse { line: 1, .. })));
    }

    fn arb_transform() -> impl Strategy<Value = Transformation> {
        (-5i32..5, -5i32..5, 0u8..6, 1i32..4).prop_map(|(q, r, rot, s)| Transformation::new(GridCoord::new(q, r), rot, s))
    }

    proptest! {
        #[test]
        fn representation_is_equivariant_under_isometries(q in -5i32..5, r in -5i32..5, rot in 0u8..6, u in arb_transform()) {
            let t = Transformation::new(GridCoord::new(q, r), rot, 1);
            let s = trapezoid();
            let lhs = representation(&s, &t.compose(&u));
            let mut rhs: Vec<GridCoord> = representation(&s, &u).into_iter().map(|p| t.apply(p)).collect();
            rhs.sort();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn representation_is_equivariant_on_the_coarse_lattice(t in arb_transform(), u in arb_transform()) {
            let s = trapezoid();
            let lhs = representation(&s, &t.compose(&u));
            let mut rhs: Vec<GridCoord> = representation(&s, &u).into_iter().map(|p| {
                // apply t to a point of the σ'-scaled image
                t.translation + p.scale(t.scale).rotate_ccw(t.rotation)
            }).collect();
            rhs.sort();
            // scaling a node set is not a representation; compare on the σ-lattice only
            let lhs_on_lattice: Vec<GridCoord> = lhs.into_iter().filter(|p| {
                let d = *p - t.translation;
                let back = d.rotate_ccw((6 - t.rotation) % 6);
                back.q % t.scale == 0 && back.r % t.scale == 0
            }).collect();
            prop_assert_eq!(lhs_on_lattice, rhs);
        }
    }
}
