use serde::{Deserialize, Serialize};

use super::structure::Structure;
use super::MAX_LOCAL_PINS;

/// Disjoint-set forest with path halving and union by size.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let p = self.parent[x] as usize;
            self.parent[x] = self.parent[p];
            x = p;
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a as u32;
        self.size[a] += self.size[b];
        true
    }
}

/// An amoebot's wiring over its local pins.
///
/// Local pin `dir * k + i` is pin `i` on the bond in local direction `dir`.
/// Each pin stores the smallest pin index of its class, so two configurations
/// with the same partition compare equal.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PinConfig {
    #[serde(with = "label_array")]
    labels: [u8; MAX_LOCAL_PINS],
}

mod label_array {
    use super::MAX_LOCAL_PINS;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[u8; MAX_LOCAL_PINS], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[u8; MAX_LOCAL_PINS], D::Error> {
        let v: Vec<u8> = Vec::deserialize(d)?;
        v.try_into()
            .map_err(|_| serde::de::Error::custom("wrong label count"))
    }
}

impl Default for PinConfig {
    fn default() -> Self {
        Self::EMPTY
    }
}

impl std::fmt::Debug for PinConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let wired: Vec<(usize, u8)> = self
            .labels
            .iter()
            .enumerate()
            .filter(|(i, l)| **l as usize != *i)
            .map(|(i, l)| (i, *l))
            .collect();
        f.debug_struct("PinConfig").field("wired", &wired).finish()
    }
}

impl PinConfig {
    pub const EMPTY: PinConfig = {
        let mut labels = [0u8; MAX_LOCAL_PINS];
        let mut i = 0;
        while i < MAX_LOCAL_PINS {
            labels[i] = i as u8;
            i += 1;
        }
        PinConfig { labels }
    };

    /// All pins of all bonds in one class.
    pub fn global(k: usize) -> PinConfig {
        let mut c = PinConfig::EMPTY;
        for p in 0..6 * k {
            c.labels[p] = 0;
        }
        c
    }

    pub fn label(&self, pin: usize) -> usize {
        self.labels[pin] as usize
    }

    pub fn same_class(&self, a: usize, b: usize) -> bool {
        self.labels[a] == self.labels[b]
    }

    pub fn is_empty(&self) -> bool {
        *self == PinConfig::EMPTY
    }

    /// Joins the classes of `a` and `b`.
    pub fn connect(&mut self, a: usize, b: usize) {
        let (la, lb) = (self.labels[a], self.labels[b]);
        if la == lb {
            return;
        }
        let (keep, drop) = if la < lb { (la, lb) } else { (lb, la) };
        for l in self.labels.iter_mut() {
            if *l == drop {
                *l = keep;
            }
        }
    }

    /// Joins every pin in `pins` into one class.
    pub fn join(&mut self, pins: impl IntoIterator<Item = usize>) {
        let mut it = pins.into_iter();
        if let Some(first) = it.next() {
            for p in it {
                self.connect(first, p);
            }
        }
    }

    /// Bitmask of the pins in the class of `pin`.
    pub fn class_mask(&self, pin: usize) -> u64 {
        let l = self.labels[pin];
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, x)| **x == l)
            .fold(0u64, |m, (i, _)| m | 1 << i)
    }

    /// Pairs of pins that are wired, as a star from each class label.
    pub fn wires(&self) -> Vec<(u8, u8)> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(i, l)| **l as usize != *i)
            .map(|(i, l)| (*l, i as u8))
            .collect()
    }
}

/// Partition of the physical pins into circuits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitPartition {
    /// Circuit id per physical pin, numbered in order of first appearance.
    pub block: Vec<u32>,
    pub num_blocks: usize,
}

impl CircuitPartition {
    pub fn from_union_find(uf: &mut UnionFind) -> Self {
        let n = uf.len();
        let mut id = vec![u32::MAX; n];
        let mut block = Vec::with_capacity(n);
        let mut next = 0u32;
        for p in 0..n {
            let r = uf.find(p);
            if id[r] == u32::MAX {
                id[r] = next;
                next += 1;
            }
            block.push(id[r]);
        }
        CircuitPartition {
            block,
            num_blocks: next as usize,
        }
    }

    /// Circuit ids of the local class of `pin` at amoebot `i`, or `None` if
    /// that pin has no bond.
    pub fn block_of(&self, pin_map: &[u32; MAX_LOCAL_PINS], pin: usize) -> Option<usize> {
        let p = pin_map[pin];
        (p != u32::MAX).then(|| self.block[p as usize] as usize)
    }
}

/// Connected components of the pin graph under the given configurations.
pub fn compute_circuits(s: &Structure, configs: &[PinConfig]) -> CircuitPartition {
    let maps: Vec<_> = (0..s.len()).map(|i| s.local_pin_map(i)).collect();
    compute_circuits_with_maps(s.num_physical_pins(), &maps, configs)
}

pub(crate) fn compute_circuits_with_maps(
    num_pins: usize,
    maps: &[[u32; MAX_LOCAL_PINS]],
    configs: &[PinConfig],
) -> CircuitPartition {
    let mut uf = UnionFind::new(num_pins);
    for (map, cfg) in maps.iter().zip(configs) {
        // first physical pin seen per class label
        let mut anchor = [u32::MAX; MAX_LOCAL_PINS];
        for (pin, &phys) in map.iter().enumerate() {
            if phys == u32::MAX {
                continue;
            }
            let l = cfg.labels[pin] as usize;
            if anchor[l] == u32::MAX {
                anchor[l] = phys;
            } else {
                uf.union(anchor[l] as usize, phys as usize);
            }
        }
    }
    CircuitPartition::from_union_find(&mut uf)
}
