use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Chirality, Direction, GridCoord, Orientation};

use super::MAX_PINS;

/// A bond, named by the endpoint from which the other lies in direction
/// `0..3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeId {
    pub canonical: GridCoord,
    pub direction: Direction,
}

impl EdgeId {
    /// Normalizes the bond between `a` and its neighbor in direction `d`.
    pub fn between(a: GridCoord, d: Direction) -> EdgeId {
        if d.index() < 3 {
            EdgeId { canonical: a, direction: d }
        } else {
            EdgeId { canonical: a.neighbor(d), direction: d.opposite() }
        }
    }

    pub fn other(&self) -> GridCoord {
        self.canonical.neighbor(self.direction)
    }

    pub fn endpoints(&self) -> (GridCoord, GridCoord) {
        (self.canonical, self.other())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PhysicalPin {
    pub edge: EdgeId,
    pub slot: u8,
}

/// Local pin index of `slot` as seen by an endpoint of the bond.
///
/// The canonical endpoint with counterclockwise chirality numbers slots in
/// engine order; each of "non-canonical" and "clockwise" reverses the order.
pub fn local_index_for(is_canonical: bool, chirality: Chirality, k: usize, slot: usize) -> usize {
    if is_canonical ^ (chirality == Chirality::Cw) {
        slot
    } else {
        k - 1 - slot
    }
}

/// A connected set of amoebots with their orientations.
///
/// Amoebots are stored in sorted coordinate order, which is the stable
/// enumeration used for RNG streams and traces.
#[derive(Clone, Debug)]
pub struct Structure {
    coords: Vec<GridCoord>,
    orientations: Vec<Orientation>,
    index: HashMap<GridCoord, usize>,
    /// Neighbor amoebot index per global direction.
    adjacency: Vec<[Option<u32>; 6]>,
    /// Edge index per amoebot and global direction.
    edge_of: Vec<[Option<u32>; 6]>,
    edges: Vec<EdgeId>,
    k: usize,
    seed: u64,
    pub(crate) epoch: u64,
}

pub fn build_structure(
    coords: &[GridCoord],
    orientations: &[Orientation],
    k: usize,
    seed: u64,
) -> Result<Structure> {
    Structure::new(coords, orientations, k, seed)
}

impl Structure {
    pub fn new(
        coords: &[GridCoord],
        orientations: &[Orientation],
        k: usize,
        seed: u64,
    ) -> Result<Structure> {
        if k < 1 || k > MAX_PINS {
            return Err(Error::InvalidPinCount { got: k, max: MAX_PINS });
        }
        if coords.len() != orientations.len() {
            return Err(Error::OrientationCountMismatch {
                coords: coords.len(),
                orientations: orientations.len(),
            });
        }
        if coords.is_empty() {
            return Err(Error::EmptyStructure);
        }
        let mut pairs: Vec<(GridCoord, Orientation)> =
            coords.iter().copied().zip(orientations.iter().copied()).collect();
        pairs.sort_by_key(|p| p.0);
        for w in pairs.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::DuplicateCoord(w[0].0));
            }
        }
        let coords: Vec<GridCoord> = pairs.iter().map(|p| p.0).collect();
        let orientations: Vec<Orientation> = pairs.iter().map(|p| p.1).collect();
        let index: HashMap<GridCoord, usize> =
            coords.iter().enumerate().map(|(i, c)| (*c, i)).collect();

        let n = coords.len();
        let mut adjacency = vec![[None; 6]; n];
        let mut edge_of = vec![[None; 6]; n];
        let mut edges = Vec::new();
        for (i, c) in coords.iter().enumerate() {
            for d in Direction::ALL {
                if let Some(&j) = index.get(&c.neighbor(d)) {
                    adjacency[i][d.index()] = Some(j as u32);
                    if i < j {
                        let e = edges.len() as u32;
                        edges.push(EdgeId::between(*c, d));
                        edge_of[i][d.index()] = Some(e);
                        edge_of[j][d.opposite().index()] = Some(e);
                    }
                }
            }
        }

        let s = Structure {
            coords,
            orientations,
            index,
            adjacency,
            edge_of,
            edges,
            k,
            seed,
            epoch: 0,
        };
        if !s.is_connected() {
            return Err(Error::DisconnectedStructure);
        }
        Ok(s)
    }

    /// Structure with every amoebot in the canonical orientation.
    pub fn uniform(coords: &[GridCoord], k: usize, seed: u64) -> Result<Structure> {
        let o = vec![Orientation::CANONICAL; coords.len()];
        Structure::new(coords, &o, k, seed)
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.len()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(i) = queue.pop_front() {
            for j in self.adjacency[i].iter().flatten() {
                let j = *j as usize;
                if !seen[j] {
                    seen[j] = true;
                    count += 1;
                    queue.push_back(j);
                }
            }
        }
        count == self.len()
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn pins_per_edge(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn coords(&self) -> &[GridCoord] {
        &self.coords
    }

    pub fn coord(&self, i: usize) -> GridCoord {
        self.coords[i]
    }

    pub fn orientations(&self) -> &[Orientation] {
        &self.orientations
    }

    pub fn orientation(&self, i: usize) -> Orientation {
        self.orientations[i]
    }

    pub fn set_orientation(&mut self, i: usize, o: Orientation) {
        self.orientations[i] = o;
    }

    pub fn position(&self, c: GridCoord) -> Option<usize> {
        self.index.get(&c).copied()
    }

    pub fn contains(&self, c: GridCoord) -> bool {
        self.index.contains_key(&c)
    }

    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    pub fn num_physical_pins(&self) -> usize {
        self.edges.len() * self.k
    }

    /// Neighbor index of amoebot `i` in global direction `d`.
    pub fn neighbor(&self, i: usize, d: Direction) -> Option<usize> {
        self.adjacency[i][d.index()].map(|j| j as usize)
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].iter().flatten().count()
    }

    /// Edge index of the bond at amoebot `i` in global direction `d`.
    pub fn edge_at(&self, i: usize, d: Direction) -> Option<usize> {
        self.edge_of[i][d.index()].map(|e| e as usize)
    }

    pub fn physical_pin(&self, id: usize) -> PhysicalPin {
        PhysicalPin {
            edge: self.edges[id / self.k],
            slot: (id % self.k) as u8,
        }
    }

    pub fn physical_pin_id(&self, p: PhysicalPin) -> Option<usize> {
        let i = self.position(p.edge.canonical)?;
        let e = self.edge_at(i, p.edge.direction)?;
        Some(e * self.k + p.slot as usize)
    }

    pub fn local_pin_index(&self, u: GridCoord, e: EdgeId, slot: usize) -> Result<usize> {
        let i = self.position(u).ok_or(Error::UnknownAmoebot(u))?;
        let (a, b) = e.endpoints();
        if (u != a && u != b) || !self.contains(a) || !self.contains(b) {
            return Err(Error::NotIncident(u));
        }
        Ok(local_index_for(u == a, self.orientations[i].chirality, self.k, slot))
    }

    /// Physical pin ids for each local pin `dir * k + index` of amoebot `i`.
    pub fn local_pin_map(&self, i: usize) -> [u32; super::MAX_LOCAL_PINS] {
        let mut map = [u32::MAX; super::MAX_LOCAL_PINS];
        let o = self.orientations[i];
        let me = self.coords[i];
        for l in Direction::ALL {
            let g = o.local_to_global(l);
            if let Some(e) = self.edge_at(i, g) {
                let canonical = self.edges[e].canonical == me;
                for lp in 0..self.k {
                    // the slot/local mapping is an involution
                    let slot = local_index_for(canonical, o.chirality, self.k, lp);
                    map[l.index() * self.k + lp] = (e * self.k + slot) as u32;
                }
            }
        }
        map
    }

    /// Occupancy of the six neighbors as a bitmask over local directions.
    pub fn local_neighbor_mask(&self, i: usize) -> u8 {
        let o = self.orientations[i];
        let mut m = 0u8;
        for l in Direction::ALL {
            if self.adjacency[i][o.local_to_global(l).index()].is_some() {
                m |= 1 << l.index();
            }
        }
        m
    }

    /// Replaces the seed and resets the run counter.
    pub fn with_seed(mut self, seed: u64) -> Structure {
        self.seed = seed;
        self.epoch = 0;
        self
    }

    pub fn with_pins(&self, k: usize) -> Result<Structure> {
        Structure::new(&self.coords, &self.orientations, k, self.seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(q: i32, r: i32) -> GridCoord {
        GridCoord::new(q, r)
    }

    #[test]
    fn build_examples() {
        let s = build_structure(&[c(0, 0)], &[Orientation::CANONICAL], 2, 7).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.edges().len(), 0);

        let s = Structure::uniform(&[c(0, 0), c(1, 0)], 2, 7).unwrap();
        assert_eq!(s.edges().len(), 1);
        assert_eq!(s.num_physical_pins(), 2);

        assert!(matches!(
            Structure::uniform(&[c(0, 0), c(2, 0)], 2, 7),
            Err(Error::DisconnectedStructure)
        ));
        assert!(matches!(
            Structure::uniform(&[c(0, 0), c(0, 0)], 2, 7),
            Err(Error::DuplicateCoord(_))
        ));
        assert!(matches!(
            Structure::uniform(&[c(0, 0)], 0, 7),
            Err(Error::InvalidPinCount { .. })
        ));
    }

    #[test]
    fn every_bond_has_one_edge_id() {
        let coords: Vec<_> = (0..4).flat_map(|q| (0..3).map(move |r| c(q, r))).collect();
        let s = Structure::uniform(&coords, 1, 0).unwrap();
        let mut seen = std::collections::HashSet::new();
        for (i, a) in s.coords().iter().enumerate() {
            for d in Direction::ALL {
                if let Some(e) = s.edge_at(i, d) {
                    assert_eq!(s.edges()[e], EdgeId::between(*a, d));
                    seen.insert(s.edges()[e]);
                }
            }
        }
        assert_eq!(seen.len(), s.edges().len());
        for e in s.edges() {
            assert!(e.direction.index() < 3);
        }
    }

    #[test]
    fn pin_labels_by_chirality() {
        let mk = |cu, cv| {
            Structure::new(
                &[c(0, 0), c(1, 0)],
                &[Orientation::new(cu, 0), Orientation::new(cv, 0)],
                2,
                1,
            )
            .unwrap()
        };
        let e = EdgeId::between(c(0, 0), Direction::new(0));
        let s = mk(Chirality::Ccw, Chirality::Ccw);
        assert_eq!(s.local_pin_index(c(0, 0), e, 0).unwrap(), 0);
        assert_eq!(s.local_pin_index(c(1, 0), e, 0).unwrap(), 1);
        let s = mk(Chirality::Ccw, Chirality::Cw);
        assert_eq!(s.local_pin_index(c(0, 0), e, 0).unwrap(), 0);
        assert_eq!(s.local_pin_index(c(1, 0), e, 0).unwrap(), 0);
        assert!(matches!(
            s.local_pin_index(c(5, 5), e, 0),
            Err(Error::UnknownAmoebot(_))
        ));
        let s1 = Structure::uniform(&[c(0, 0), c(1, 0)], 1, 0).unwrap();
        assert_eq!(s1.local_pin_index(c(1, 0), e, 0).unwrap(), 0);
    }

    #[test]
    fn agreement_rule_exhaustive() {
        // endpoints agree on every slot exactly when chiralities differ
        let e = EdgeId::between(c(0, 0), Direction::new(0));
        for cu in [Chirality::Ccw, Chirality::Cw] {
            for cv in [Chirality::Ccw, Chirality::Cw] {
                let s = Structure::new(
                    &[c(0, 0), c(1, 0)],
                    &[Orientation::new(cu, 0), Orientation::new(cv, 3)],
                    2,
                    1,
                )
                .unwrap();
                for slot in 0..2 {
                    let a = s.local_pin_index(c(0, 0), e, slot).unwrap();
                    let b = s.local_pin_index(c(1, 0), e, slot).unwrap();
                    assert_eq!(a == b, cu != cv);
                }
            }
        }
    }

    #[test]
    fn pin_map_is_consistent() {
        let coords = [c(0, 0), c(1, 0), c(0, 1), c(-1, 1)];
        let o = [
            Orientation::new(Chirality::Ccw, 2),
            Orientation::new(Chirality::Cw, 5),
            Orientation::new(Chirality::Cw, 0),
            Orientation::new(Chirality::Ccw, 1),
        ];
        let s = Structure::new(&coords, &o, 3, 0).unwrap();
        let mut hits = vec![0; s.num_physical_pins()];
        for i in 0..s.len() {
            let map = s.local_pin_map(i);
            for &p in map.iter().filter(|p| **p != u32::MAX) {
                hits[p as usize] += 1;
                let pin = s.physical_pin(p as usize);
                let local = s.local_pin_index(s.coord(i), pin.edge, pin.slot as usize).unwrap();
                let ldir = (0..6).find(|l| map[l * 3 + local] == p).unwrap();
                assert_eq!(
                    s.coord(i).neighbor(s.orientation(i).local_to_global(Direction::new(ldir as i64))),
                    if pin.edge.canonical == s.coord(i) { pin.edge.other() } else { pin.edge.canonical }
                );
            }
        }
        assert!(hits.iter().all(|h| *h == 2));
    }
}
