//! Falling factorials, their lcm quotients, and polynomials in the falling
//! factorial basis.

use serde::Serialize;

use crate::error::{Error, Result};

pub fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn lcm(a: u128, b: u128) -> u128 {
    if a == 0 || b == 0 {
        0
    } else {
        a / gcd(a, b) * b
    }
}

/// `lcm(1, …, n)`, with `lcm() = 1`.
pub fn lcm_upto(n: u64) -> u128 {
    (1..=n as u128).fold(1, lcm)
}

/// `(x)_i = x·(x−1)···(x−i+1)`.
pub fn falling(x: i128, i: u32) -> i128 {
    (0..i as i128).map(|j| x - j).product()
}

/// `lcm(x, x−1, …, x−i+1)` for `x ≥ i`.
pub fn lcm_falling(x: u64, i: u32) -> u128 {
    (0..i as u64).map(|j| (x - j) as u128).fold(1, lcm)
}

/// `g_i(x) = (x)_i / lcm_i(x)` for `x ≥ i`.
pub fn g(x: u64, i: u32) -> u128 {
    assert!(x >= i as u64, "g_{i}({x}) needs x ≥ i");
    falling(x as i128, i) as u128 / lcm_falling(x, i)
}

/// Stirling numbers of the second kind up to row `n`.
fn stirling2(n: usize) -> Vec<Vec<i128>> {
    let mut s = vec![vec![0i128; n + 1]; n + 1];
    s[0][0] = 1;
    for i in 1..=n {
        for k in 1..=i {
            s[i][k] = k as i128 * s[i - 1][k] + s[i - 1][k - 1];
        }
    }
    s
}

/// A polynomial with its falling-factorial coefficients and the periodic
/// tables of `g_i`.
#[derive(Clone, Debug, Serialize)]
pub struct PolySpec {
    /// Standard basis, constant term first.
    pub coeffs: Vec<i64>,
    /// `a_i` with `p(x) = Σ a_i·(x)_i`.
    pub falling: Vec<i64>,
    /// `periods[i] = lcm(1, …, i−1)`.
    pub periods: Vec<u64>,
    /// `g_tables[i][x mod periods[i]] = g_i(x)` for every `x ≥ i`.
    pub g_tables: Vec<Vec<u64>>,
    /// Heights up to this value are checked by direct evaluation.
    pub threshold: u64,
}

impl PolySpec {
    pub fn new(coeffs: &[i64]) -> Result<PolySpec> {
        let mut coeffs = coeffs.to_vec();
        while coeffs.len() > 1 && coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            return Err(Error::InvalidConfig("polynomial needs a coefficient".into()));
        }
        let d = coeffs.len() - 1;
        if d > 6 {
            return Err(Error::InvalidConfig(format!("degree {d} is too large, at most 6")));
        }
        let st = stirling2(d);
        let falling: Vec<i64> = (0..=d)
            .map(|k| (k..=d).map(|n| coeffs[n] as i128 * st[n][k]).sum::<i128>() as i64)
            .collect();
        let periods: Vec<u64> = (0..=d).map(|i| lcm_upto(i.saturating_sub(1) as u64) as u64).collect();
        let g_tables = (0..=d)
            .map(|i| {
                let m = periods[i];
                (0..m)
                    .map(|r| {
                        let x = (i as u64..).find(|x| x % m == r).unwrap();
                        g(x, i as u32) as u64
                    })
                    .collect()
            })
            .collect();
        let mut spec = PolySpec { coeffs, falling, periods, g_tables, threshold: 0 };
        spec.threshold = spec.compute_threshold();
        Ok(spec)
    }

    /// Parses `c0,c1,…,cd`.
    pub fn parse(text: &str) -> Result<PolySpec> {
        let coeffs: std::result::Result<Vec<i64>, _> = text.split(',').map(|s| s.trim().parse()).collect();
        let coeffs = coeffs.map_err(|_| Error::InvalidConfig(format!("bad polynomial `{text}`")))?;
        PolySpec::new(&coeffs)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, h: i128) -> i128 {
        self.coeffs.iter().rev().fold(0, |acc, c| acc * h + *c as i128)
    }

    pub fn eval_falling(&self, h: i128) -> i128 {
        self.falling.iter().enumerate().map(|(i, a)| *a as i128 * falling(h, i as u32)).sum()
    }

    /// `g_i(h)` from `h mod lcm(1, …, d−1)`, valid for `h ≥ i`.
    pub fn g_from_residue(&self, i: usize, residue: u64) -> u64 {
        let t = &self.g_tables[i];
        t[(residue % t.len() as u64) as usize]
    }

    pub fn g_max(&self, i: usize) -> u64 {
        self.g_tables[i].iter().copied().max().unwrap_or(1)
    }

    /// Modulus of the single add tree that yields every residue needed.
    pub fn residue_modulus(&self) -> u64 {
        self.periods.iter().copied().fold(1, |a, b| lcm(a as u128, b as u128) as u64)
    }

    /// Pebble positions after each stage `d, d−1, …, 0`.
    pub fn pebble_path(&self, h: u64) -> Vec<i128> {
        let mut pos = 0i128;
        (0..=self.degree())
            .rev()
            .map(|i| {
                pos += self.falling[i] as i128 * falling(h as i128, i as u32);
                pos
            })
            .collect()
    }

    /// True if, for `l = p(h) ≥ h`, the staged pebble walk never leaves
    /// `[0, 2l]`.
    fn walk_is_safe(&self, h: u64) -> bool {
        let l = self.eval(h as i128);
        if l < h as i128 {
            return true;
        }
        self.pebble_path(h).iter().all(|p| (0..=2 * l).contains(p))
    }

    fn compute_threshold(&self) -> u64 {
        let d = self.degree() as u64;
        let a = self.falling.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0);
        let scan = 8 * (a + 1) * (d + 1) + 16;
        let last_bad = (d..=scan).filter(|h| !self.walk_is_safe(*h)).max().unwrap_or(0);
        last_bad.max(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn g2_is_one() {
        for x in 2..500 {
            assert_eq!(g(x, 2), 1);
        }
    }

    #[test]
    fn g3_alternates() {
        assert_eq!([4, 5, 6, 7].map(|x| g(x, 3)), [2, 1, 2, 1]);
        let p = PolySpec::new(&[0, 0, 0, 1]).unwrap();
        assert_eq!(p.periods[3], 2);
        for x in 3..300u64 {
            assert_eq!(p.g_from_residue(3, x % 2), g(x, 3) as u64);
        }
    }

    #[test]
    fn example_polynomial_converts() {
        // 3h(h−1) − 2h − 3 = 3h² − 5h − 3
        let p = PolySpec::new(&[-3, -5, 3]).unwrap();
        assert_eq!(p.falling, vec![-3, -2, 3]);
        for h in 1..=10 {
            assert_eq!(p.eval(h), p.eval_falling(h));
        }
        assert_eq!(p.eval(3), 9);
        assert_eq!(p.pebble_path(3), vec![18, 12, 9]);
    }

    #[test]
    fn parse_and_trim() {
        let p = PolySpec::parse("1, 2, 0, 0").unwrap();
        assert_eq!(p.degree(), 1);
        assert!(PolySpec::parse("1,x").is_err());
    }

    #[test]
    fn tables_are_periodic() {
        let p = PolySpec::new(&[1, 1, 1, 1, 1, 1]).unwrap();
        assert_eq!(p.periods, vec![1, 1, 1, 2, 6, 12]);
        for i in 0..=5usize {
            for x in i as u64..400 {
                assert_eq!(p.g_from_residue(i, x % p.residue_modulus()), g(x, i as u32) as u64, "g_{i}({x})");
            }
        }
    }

    proptest! {
        #[test]
        fn falling_basis_agrees(coeffs in prop::collection::vec(-6i64..=6, 1..=5), h in 0i128..40) {
            let p = PolySpec::new(&coeffs).unwrap();
            prop_assert_eq!(p.eval(h), p.eval_falling(h));
        }

        #[test]
        fn walk_is_safe_above_threshold(coeffs in prop::collection::vec(-5i64..=5, 1..=4)) {
            let p = PolySpec::new(&coeffs).unwrap();
            for h in p.threshold + 1..p.threshold + 200 {
                prop_assert!(p.walk_is_safe(h), "h = {}", h);
            }
        }
    }
}
