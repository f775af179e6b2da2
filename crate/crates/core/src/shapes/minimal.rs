//! Minimality: no connected shape with fewer faces has the same node set
//! after scaling.

use std::collections::{BTreeSet, HashMap};

use super::{representation, triangles_connected, Pointing, Shape, Transformation, Triangle};
use crate::error::{Error, Result};
use crate::grid::GridCoord;

const SEARCH_BUDGET: u64 = 2_000_000;

/// Scales up to this factor are compared.
pub const MAX_MINIMALITY_SCALE: i32 = 4;

pub fn is_minimal(shape: &Shape) -> Result<bool> {
    is_minimal_with_budget(shape, SEARCH_BUDGET)
}

pub fn is_minimal_with_budget(shape: &Shape, budget: u64) -> Result<bool> {
    let mut left = budget;
    for sigma in 1..=MAX_MINIMALITY_SCALE {
        let target = representation(shape, &Transformation::scaled(sigma));
        if smaller_cover(&target, shape.len(), &mut left)?.is_some() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A connected set of fewer than `faces` equal lattice triangles whose node
/// set is exactly `target`.
pub fn smaller_cover(target: &[GridCoord], faces: usize, budget: &mut u64) -> Result<Option<Vec<Triangle>>> {
    if faces <= 1 {
        return Ok(None);
    }
    let index: HashMap<GridCoord, usize> = target.iter().enumerate().map(|(i, c)| (*c, i)).collect();
    let span = target
        .iter()
        .map(|a| target.iter().map(|b| (*a - *b).norm()).max().unwrap_or(0))
        .max()
        .unwrap_or(0) as i32;
    for s in 1..=span.max(1) {
        for oq in 0..s {
            for or in 0..s {
                let cands = candidates(target, &index, s, GridCoord::new(oq, or));
                let mut search = Search {
                    cands: &cands,
                    per_node: vec![Vec::new(); target.len()],
                    covered: vec![0; target.len()],
                    uncovered: target.len(),
                    chosen: Vec::new(),
                    limit: faces - 1,
                    per_tri: ((s + 1) * (s + 2) / 2) as usize,
                    budget,
                };
                for (i, (_, nodes)) in cands.iter().enumerate() {
                    for n in nodes {
                        search.per_node[*n].push(i);
                    }
                }
                if search.per_node.iter().any(|v| v.is_empty()) {
                    continue;
                }
                if search.run()? {
                    return Ok(Some(search.chosen.iter().map(|i| cands[*i].0).collect()));
                }
            }
        }
    }
    Ok(None)
}

/// Size-`s` triangles anchored on `offset + sZ²` with all nodes in the target.
fn candidates(
    target: &[GridCoord],
    index: &HashMap<GridCoord, usize>,
    s: i32,
    offset: GridCoord,
) -> Vec<(Triangle, Vec<usize>)> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let diag = GridCoord::new(s, s);
    for &n in target {
        for (anchor, p) in [(n, Pointing::Up), (n - diag, Pointing::Down)] {
            let d = anchor - offset;
            if d.q.rem_euclid(s) != 0 || d.r.rem_euclid(s) != 0 {
                continue;
            }
            let t = Triangle::new(anchor, p, s);
            if !seen.insert(t) {
                continue;
            }
            let nodes: Option<Vec<usize>> = t.nodes().iter().map(|c| index.get(c).copied()).collect();
            if let Some(nodes) = nodes {
                out.push((t, nodes));
            }
        }
    }
    out
}

struct Search<'a> {
    cands: &'a [(Triangle, Vec<usize>)],
    per_node: Vec<Vec<usize>>,
    covered: Vec<u32>,
    uncovered: usize,
    chosen: Vec<usize>,
    limit: usize,
    per_tri: usize,
    budget: &'a mut u64,
}

impl Search<'_> {
    fn run(&mut self) -> Result<bool> {
        if *self.budget == 0 {
            return Err(Error::SearchBudgetExceeded);
        }
        *self.budget -= 1;
        if self.uncovered == 0 {
            let set: BTreeSet<Triangle> = self.chosen.iter().map(|i| self.cands[*i].0).collect();
            return Ok(triangles_connected(&set));
        }
        let room = self.limit - self.chosen.len();
        if room == 0 || room * self.per_tri < self.uncovered {
            return Ok(false);
        }
        let node = (0..self.covered.len())
            .filter(|n| self.covered[*n] == 0)
            .min_by_key(|n| self.per_node[*n].len())
            .unwrap();
        for c in self.per_node[node].clone() {
            if self.chosen.contains(&c) {
                continue;
            }
            self.apply(c, true);
            let found = self.run()?;
            if found {
                return Ok(true);
            }
            self.apply(c, false);
        }
        Ok(false)
    }

    fn apply(&mut self, c: usize, add: bool) {
        for &n in &self.cands[c].1 {
            if add {
                if self.covered[n] == 0 {
                    self.uncovered -= 1;
                }
                self.covered[n] += 1;
            } else {
                self.covered[n] -= 1;
                if self.covered[n] == 0 {
                    self.uncovered += 1;
                }
            }
        }
        if add {
            self.chosen.push(c);
        } else {
            self.chosen.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::tests::trapezoid;
    use super::*;
    use Pointing::*;

    fn shape(faces: &[(i32, i32, Pointing)]) -> Shape {
        Shape::new(faces.iter().map(|(q, r, p)| (GridCoord::new(*q, *r), *p))).unwrap()
    }

    #[test]
    fn single_triangle_is_minimal() {
        assert!(is_minimal(&Shape::triangle()).unwrap());
    }

    #[test]
    fn subdivided_triangle_is_not_minimal() {
        let s = shape(&[(0, 0, Up), (0, 0, Down), (1, 0, Up), (0, 1, Up)]);
        assert!(!is_minimal(&s).unwrap());
    }

    #[test]
    fn trapezoid_and_rhombus_are_minimal() {
        assert!(is_minimal(&trapezoid()).unwrap());
        assert!(is_minimal(&shape(&[(0, 0, Up), (0, 0, Down)])).unwrap());
    }

    #[test]
    fn hexagon_node_set_has_a_smaller_cover() {
        let hex = shape(&[(0, 0, Up), (-1, 0, Down), (-1, 0, Up), (-1, -1, Down), (0, -1, Up), (0, -1, Down)]);
        let mut budget = SEARCH_BUDGET;
        let target = representation(&hex, &Transformation::scaled(1));
        let cover = smaller_cover(&target, hex.len(), &mut budget).unwrap().unwrap();
        assert_eq!(cover.len(), 5);
        assert!(!is_minimal(&hex).unwrap());
    }

    #[test]
    fn budget_is_enforced() {
        let s = shape(&[(0, 0, Up), (0, 0, Down), (1, 0, Up), (1, 0, Down), (2, 0, Up)]);
        assert!(matches!(is_minimal_with_budget(&s, 3), Err(Error::SearchBudgetExceeded)));
    }
}
