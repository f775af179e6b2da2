//! Structure generators for tests and experiments.

use std::collections::{HashSet, VecDeque};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{Chirality, Direction, GridCoord, Orientation};

/// Random connected structure grown one node at a time from the origin.
pub fn gen_random_connected(n: usize, seed: u64) -> Vec<GridCoord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order = vec![GridCoord::ORIGIN];
    let mut occupied: HashSet<GridCoord> = order.iter().copied().collect();
    while order.len() < n {
        let base = order[rng.gen_range(0..order.len())];
        let free: Vec<GridCoord> = base.neighbors().filter(|c| !occupied.contains(c)).collect();
        if let Some(&c) = free.choose(&mut rng) {
            occupied.insert(c);
            order.push(c);
        }
    }
    order
}

/// Orientations with optionally random chirality and compass offset.
pub fn random_orientations(n: usize, seed: u64, chirality: bool, offset: bool) -> Vec<Orientation> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5EED_0F0F);
    (0..n)
        .map(|_| {
            let ch = if chirality && rng.gen() { Chirality::Cw } else { Chirality::Ccw };
            let off = if offset { rng.gen_range(0..6) } else { 0 };
            Orientation::new(ch, off)
        })
        .collect()
}

/// Parallelogram with `l + 1` nodes along direction `rotation` and `h + 1`
/// along the next direction counterclockwise.
pub fn gen_parallelogram(h: u32, l: u32, rotation: u8) -> Vec<GridCoord> {
    let a = Direction::new(rotation as i64).vector();
    let b = Direction::new(rotation as i64 + 1).vector();
    let mut out = Vec::with_capacity(((h + 1) * (l + 1)) as usize);
    for j in 0..=h as i32 {
        for i in 0..=l as i32 {
            out.push(a.scale(i) + b.scale(j));
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PerturbMode {
    Add,
    Remove,
}

pub fn is_connected(coords: &[GridCoord]) -> bool {
    let set: HashSet<GridCoord> = coords.iter().copied().collect();
    let Some(&start) = coords.first() else {
        return false;
    };
    let mut seen = HashSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(c) = queue.pop_front() {
        for n in c.neighbors() {
            if set.contains(&n) && seen.insert(n) {
                queue.push_back(n);
            }
        }
    }
    seen.len() == set.len()
}

/// Adds one node next to the structure, or removes one node whose removal
/// keeps it connected and non-empty.
pub fn perturb(coords: &[GridCoord], mode: PerturbMode, seed: u64) -> Result<Vec<GridCoord>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let set: HashSet<GridCoord> = coords.iter().copied().collect();
    match mode {
        PerturbMode::Add => {
            let mut free: Vec<GridCoord> = coords
                .iter()
                .flat_map(|c| c.neighbors())
                .filter(|c| !set.contains(c))
                .collect();
            free.sort();
            free.dedup();
            let c = *free.choose(&mut rng).ok_or(Error::NoValidPerturbation)?;
            let mut out = coords.to_vec();
            out.push(c);
            Ok(out)
        }
        PerturbMode::Remove => {
            let mut candidates: Vec<usize> = (0..coords.len())
                .filter(|&i| {
                    let rest: Vec<GridCoord> =
                        coords.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, c)| *c).collect();
                    !rest.is_empty() && is_connected(&rest)
                })
                .collect();
            candidates.shuffle(&mut rng);
            let i = *candidates.first().ok_or(Error::NoValidPerturbation)?;
            let mut out = coords.to_vec();
            out.remove(i);
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Structure;

    #[test]
    fn random_connected_examples() {
        assert_eq!(gen_random_connected(1, 3), vec![GridCoord::ORIGIN]);
        for seed in 0..20 {
            let c = gen_random_connected(50, seed);
            assert_eq!(c.len(), 50);
            assert!(is_connected(&c));
            assert!(Structure::uniform(&c, 2, 0).is_ok());
        }
        assert_eq!(gen_random_connected(40, 9), gen_random_connected(40, 9));
    }

    #[test]
    fn parallelogram_counts() {
        assert_eq!(gen_parallelogram(3, 8, 0).len(), 36);
        assert_eq!(gen_parallelogram(1, 1, 2).len(), 4);
        let p = gen_parallelogram(1, 5, 0);
        assert_eq!(p.len(), 12);
        for q in 0..=5 {
            assert!(p.contains(&GridCoord::new(q, 0)));
            assert!(p.contains(&GridCoord::new(q, 1)));
        }
        for rot in 0..6 {
            assert!(Structure::uniform(&gen_parallelogram(2, 4, rot), 1, 0).is_ok());
        }
    }

    #[test]
    fn perturbations() {
        let tri = vec![GridCoord::new(0, 0), GridCoord::new(1, 0), GridCoord::new(0, 1)];
        let r = perturb(&tri, PerturbMode::Remove, 1).unwrap();
        assert_eq!(r.len(), 2);
        assert!(is_connected(&r));
        assert!(matches!(
            perturb(&[GridCoord::ORIGIN], PerturbMode::Remove, 0),
            Err(Error::NoValidPerturbation)
        ));
        let a = perturb(&tri, PerturbMode::Add, 4).unwrap();
        assert_eq!(a.len(), 4);
        assert!(is_connected(&a));
    }
}
