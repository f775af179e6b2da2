//! Centralized replay of the corner-propagation triangulation.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::Serialize;

use super::{representation, Shape, Transformation, Triangle};
use crate::error::{Error, Result};
use crate::grid::{Direction, GridCoord};

pub type Edge = (GridCoord, GridCoord);

pub fn edge(a: GridCoord, b: GridCoord) -> Edge {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Unit edges with exactly one incident face.
pub fn boundary_edges(unit_faces: &BTreeSet<Triangle>) -> BTreeSet<Edge> {
    let mut count: HashMap<Edge, u32> = HashMap::new();
    for f in unit_faces {
        let [a, b, c] = f.vertices();
        for e in [edge(a, b), edge(b, c), edge(a, c)] {
            *count.entry(e).or_default() += 1;
        }
    }
    count.into_iter().filter(|(_, n)| *n == 1).map(|(e, _)| e).collect()
}

/// Straight circuits along the three axes. A line passes through a node
/// unless the node is on the boundary and the line is not running along it.
#[derive(Clone, Debug)]
pub struct AxisLines {
    /// Segment of the bond from a node in direction `axis` (0, 1 or 2).
    forward: HashMap<(GridCoord, u8), u32>,
    /// Nodes of each segment, in order along its axis.
    pub segments: Vec<Vec<GridCoord>>,
    pub segment_axis: Vec<u8>,
}

impl AxisLines {
    pub fn new(nodes: &HashSet<GridCoord>, boundary: &HashSet<Edge>) -> AxisLines {
        let on_boundary: HashSet<GridCoord> = boundary.iter().flat_map(|(a, b)| [*a, *b]).collect();
        let joined = |w: GridCoord, axis: u8| -> bool {
            let d = Direction::new(axis as i64).vector();
            let (p, n) = (w - d, w + d);
            if !nodes.contains(&p) || !nodes.contains(&n) {
                return false;
            }
            !on_boundary.contains(&w) || (boundary.contains(&edge(p, w)) && boundary.contains(&edge(w, n)))
        };
        let mut forward = HashMap::new();
        let mut segments = Vec::new();
        let mut segment_axis = Vec::new();
        let mut sorted: Vec<GridCoord> = nodes.iter().copied().collect();
        sorted.sort();
        for axis in 0..3u8 {
            let d = Direction::new(axis as i64).vector();
            for &w in &sorted {
                if !nodes.contains(&(w + d)) || (nodes.contains(&(w - d)) && joined(w, axis)) {
                    continue;
                }
                // w starts a segment
                let id = segments.len() as u32;
                let mut line = vec![w];
                let mut cur = w;
                loop {
                    forward.insert((cur, axis), id);
                    cur = cur + d;
                    line.push(cur);
                    if !joined(cur, axis) {
                        break;
                    }
                }
                segments.push(line);
                segment_axis.push(axis);
            }
        }
        AxisLines { forward, segments, segment_axis }
    }

    /// Distinct segments through `w` (at most two per axis).
    pub fn segments_at(&self, w: GridCoord) -> Vec<u32> {
        let mut out = Vec::with_capacity(6);
        for axis in 0..3u8 {
            let d = Direction::new(axis as i64).vector();
            for key in [(w, axis), (w - d, axis)] {
                if let Some(id) = self.forward.get(&key) {
                    if !out.contains(id) {
                        out.push(*id);
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Triangulation {
    pub corners: BTreeSet<GridCoord>,
    /// Sides between consecutive corners on activated lines.
    pub edges: BTreeSet<Edge>,
    pub triangles: BTreeSet<Triangle>,
    /// Evaluations of the loop condition, including the final one that finds
    /// no new corner.
    pub iterations: u32,
    /// Corners added in each iteration; the first entry is the boundary
    /// corners.
    pub added: Vec<BTreeSet<GridCoord>>,
}

impl Triangulation {
    /// Side lengths of the triangles, deduplicated.
    pub fn sizes(&self) -> BTreeSet<i32> {
        self.triangles.iter().map(|t| t.size).collect()
    }
}

/// Boundary nodes where the boundary does not run straight through.
pub fn boundary_corners(boundary: &HashSet<Edge>) -> BTreeSet<GridCoord> {
    let mut dirs: BTreeMap<GridCoord, u8> = BTreeMap::new();
    for (a, b) in boundary {
        for (x, y) in [(*a, *b), (*b, *a)] {
            if let Some(d) = (y - x).as_direction() {
                *dirs.entry(x).or_default() |= 1 << d.index();
            }
        }
    }
    dirs.into_iter()
        .filter(|(_, m)| !(m.count_ones() == 2 && (0..3).any(|d| *m == (1 << d) | (1 << (d + 3)))))
        .map(|(c, _)| c)
        .collect()
}

/// Seeds the corner set with the boundary corners, then repeatedly lets all
/// corners activate their axis lines and adds every node that lies on at
/// least two activated lines.
pub fn reference_triangulation(coords: &[GridCoord], boundary: &BTreeSet<Edge>) -> Result<Triangulation> {
    let nodes: HashSet<GridCoord> = coords.iter().copied().collect();
    let boundary: HashSet<Edge> = boundary.iter().copied().collect();
    let seeds = boundary_corners(&boundary);
    if seeds.is_empty() {
        return Err(Error::NoBoundary);
    }
    let lines = AxisLines::new(&nodes, &boundary);
    let mut corners: BTreeSet<GridCoord> = BTreeSet::new();
    let mut active: HashSet<u32> = HashSet::new();
    let mut fresh = seeds;
    let mut added = Vec::new();
    let mut iterations = 1;
    while !fresh.is_empty() {
        iterations += 1;
        for c in &fresh {
            active.extend(lines.segments_at(*c));
        }
        corners.extend(fresh.iter().copied());
        added.push(fresh);
        let mut sorted: Vec<&GridCoord> = nodes.iter().collect();
        sorted.sort();
        fresh = sorted
            .into_iter()
            .filter(|w| !corners.contains(*w))
            .filter(|w| lines.segments_at(**w).iter().filter(|s| active.contains(*s)).count() >= 2)
            .copied()
            .collect();
    }
    let mut edges = BTreeSet::new();
    for id in active {
        let on: Vec<GridCoord> = lines.segments[id as usize]
            .iter()
            .copied()
            .filter(|p| corners.contains(p))
            .collect();
        for w in on.windows(2) {
            edges.insert(edge(w[0], w[1]));
        }
    }
    let triangles = triangles_from_edges(&edges);
    Ok(Triangulation { corners, edges, triangles, iterations, added })
}

fn triangles_from_edges(edges: &BTreeSet<Edge>) -> BTreeSet<Triangle> {
    let mut out = BTreeSet::new();
    for &(a, b) in edges {
        let v = b - a;
        let s = v.norm() as i32;
        let Some(d) = GridCoord::new(v.q / s, v.r / s).as_direction() else {
            continue;
        };
        for side in [1, -1] {
            let c = a + d.rotate_ccw(side).vector().scale(s);
            if edges.contains(&edge(a, c)) && edges.contains(&edge(b, c)) {
                if let Some(t) = Triangle::from_vertices([a, b, c]) {
                    out.insert(t);
                }
            }
        }
    }
    out
}

/// Iterations the triangulation needs on the σ = 4 representation; the same
/// count holds for every σ ≥ 4.
pub fn triangulation_iteration_bound(shape: &Shape) -> u32 {
    let t = Transformation::scaled(4);
    let nodes = representation(shape, &t);
    let boundary = boundary_edges(&shape.unit_faces(&t));
    reference_triangulation(&nodes, &boundary)
        .expect("a shape always has a boundary")
        .iterations
}

#[cfg(test)]
mod tests {
    use super::super::{Pointing, Shape};
    use super::*;

    fn replay(shape: &Shape, t: &Transformation) -> Triangulation {
        let nodes = representation(shape, t);
        let boundary = boundary_edges(&shape.unit_faces(t));
        reference_triangulation(&nodes, &boundary).unwrap()
    }

    fn shape(faces: &[(i32, i32, Pointing)]) -> Shape {
        Shape::new(faces.iter().map(|(q, r, p)| (GridCoord::new(*q, *r), *p))).unwrap()
    }

    fn test_shapes() -> Vec<Shape> {
        use Pointing::*;
        vec![
            shape(&[(0, 0, Up)]),
            shape(&[(0, 0, Up), (0, 0, Down)]),
            shape(&[(0, 0, Up), (0, 0, Down), (1, 0, Up)]),
            shape(&[(0, 0, Up), (0, 0, Down), (1, 0, Up), (1, 0, Down)]),
            shape(&[(0, 0, Up), (0, 0, Down), (0, 1, Up), (-1, 1, Down)]),
            shape(&[(0, 0, Up), (-1, 0, Down), (-1, 0, Up), (-1, -1, Down), (0, -1, Up)]),
        ]
    }

    #[test]
    fn single_triangle_is_its_own_triangulation() {
        for sigma in [4, 6] {
            let tr = replay(&Shape::triangle(), &Transformation::scaled(sigma));
            assert_eq!(tr.iterations, 2);
            assert_eq!(tr.corners.len(), 3);
            assert_eq!(tr.triangles.len(), 1);
            assert_eq!(tr.sizes(), BTreeSet::from([sigma]));
        }
        assert_eq!(triangulation_iteration_bound(&Shape::triangle()), 2);
    }

    /// The L-shaped example polygon: a 6 × 4 parallelogram with a 2 × 2
    /// notch, drawn at twice its minimal scale.
    fn notched_parallelogram() -> Shape {
        let mut faces = Vec::new();
        for q in -4..2 {
            for r in 2..6 {
                if q < -2 && r < 4 {
                    continue;
                }
                faces.push((q, r, Pointing::Up));
                faces.push((q, r, Pointing::Down));
            }
        }
        shape(&faces)
    }

    #[test]
    fn notched_parallelogram_needs_four_iterations() {
        let s = notched_parallelogram();
        let tr = replay(&s, &Transformation::scaled(1));
        assert_eq!(tr.iterations, 4);
        let sizes: Vec<usize> = tr.added.iter().map(|a| a.len()).collect();
        assert_eq!(sizes, [6, 4, 1]);
        let second = [(-2, 6), (0, 2), (0, 4), (2, 4)].map(|(q, r)| GridCoord::new(q, r));
        assert_eq!(tr.added[1], BTreeSet::from(second));
        assert_eq!(tr.added[2], BTreeSet::from([GridCoord::new(0, 6)]));
        assert_eq!(tr.sizes(), BTreeSet::from([2]));
        assert_eq!(tr.triangles.len(), 10);
        assert_eq!(triangulation_iteration_bound(&s), 4);
    }

    #[test]
    fn no_boundary_is_an_error() {
        let err = reference_triangulation(&[GridCoord::new(0, 0)], &BTreeSet::new());
        assert!(matches!(err, Err(Error::NoBoundary)));
    }

    #[test]
    fn thin_parallelogram_needs_linear_iterations() {
        // height 1, length l: each iteration adds one new corner per side
        let mut last = 0;
        for l in 2..12 {
            let mut faces = Vec::new();
            for q in 0..l {
                faces.push((q, 0, Pointing::Up));
                faces.push((q, 0, Pointing::Down));
            }
            let s = shape(&faces);
            let nodes = representation(&s, &Transformation::scaled(1));
            let boundary = boundary_edges(&s.unit_faces(&Transformation::scaled(1)));
            let tr = reference_triangulation(&nodes, &boundary).unwrap();
            assert!(tr.iterations > last, "l = {l}");
            assert_eq!(tr.triangles.len(), 2 * l as usize);
            last = tr.iterations;
        }
        assert!(last >= 6);
    }

    #[test]
    fn bound_is_scale_independent() {
        for s in test_shapes() {
            let b4 = replay(&s, &Transformation::scaled(4)).iterations;
            for sigma in 5..=8 {
                for rot in [0, 1, 3] {
                    let t = Transformation::new(GridCoord::new(3, -7), rot, sigma);
                    assert_eq!(replay(&s, &t).iterations, b4, "{s} at σ = {sigma}");
                }
            }
            assert_eq!(triangulation_iteration_bound(&s), b4);
        }
    }

    #[test]
    fn scaled_shape_is_recovered() {
        for s in test_shapes() {
            for sigma in 4..=6 {
                let t = Transformation::new(GridCoord::new(1, 2), 2, sigma);
                let tr = replay(&s, &t);
                let expect: BTreeSet<Triangle> = s.transformed(&t).into_iter().collect();
                if super::super::is_minimal(&s).unwrap() {
                    assert_eq!(tr.triangles, expect, "{s}");
                }
                assert_eq!(tr.sizes().len(), 1);
            }
        }
    }

    /// Largest triangle size that tiles the unit-face region, with the tiling.
    fn minimal_tiling(region: &BTreeSet<Triangle>) -> BTreeSet<Triangle> {
        let nodes: BTreeSet<GridCoord> = region.iter().flat_map(|f| f.vertices()).collect();
        let max = nodes.iter().map(|a| nodes.iter().map(|b| (*a - *b).norm()).max().unwrap()).max().unwrap() as i32;
        for s in (1..=max.max(1)).rev() {
            for oq in 0..s {
                for or in 0..s {
                    let mut tiles = BTreeSet::new();
                    let mut covered = BTreeSet::new();
                    for a in &nodes {
                        for p in [Pointing::Up, Pointing::Down] {
                            for (bq, br) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                                let anchor = GridCoord::new(
                                    oq + ((a.q - oq).div_euclid(s) - bq) * s,
                                    or + ((a.r - or).div_euclid(s) - br) * s,
                                );
                                let t = Triangle::new(anchor, p, s);
                                let faces = t.unit_faces();
                                if faces.iter().all(|f| region.contains(f)) {
                                    covered.extend(faces);
                                    tiles.insert(t);
                                }
                            }
                        }
                    }
                    if covered == *region {
                        return tiles;
                    }
                }
            }
        }
        unreachable!("unit faces always tile")
    }

    #[test]
    fn triangulation_is_the_minimal_tiling() {
        for s in test_shapes().into_iter().filter(|s| s.len() <= 3) {
            for sigma in 1..=4 {
                for rot in 0..6 {
                    let t = Transformation::new(GridCoord::new(0, 0), rot, sigma);
                    let region = s.unit_faces(&t);
                    let best = minimal_tiling(&region);
                    let tr = replay(&s, &t);
                    assert_eq!(tr.triangles, best, "{s} σ = {sigma} rot = {rot}");
                    let corners: BTreeSet<GridCoord> = best.iter().flat_map(|t| t.vertices()).collect();
                    assert_eq!(tr.corners, corners);
                }
            }
        }
    }
}
