//! Spin configurations, boundary values and replica couplings.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bit-packed `±1` configuration; bit `x` set means `σ_x = +1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpinConfig {
    words: Vec<u64>,
    n: usize,
}

impl SpinConfig {
    /// All spins `-1`.
    pub fn all_down(n: usize) -> Self {
        Self {
            words: vec![0; n.div_ceil(64)],
            n,
        }
    }

    pub fn all_up(n: usize) -> Self {
        let mut c = Self::all_down(n);
        for x in 0..n {
            c.set(x, 1);
        }
        c
    }

    /// Configuration whose bits are the low `n` bits of `index`.
    pub fn from_index(index: u64, n: usize) -> Self {
        assert!(n <= 64);
        let mut c = Self::all_down(n);
        if n > 0 {
            c.words[0] = if n == 64 { index } else { index & ((1u64 << n) - 1) };
        }
        c
    }

    pub fn index(&self) -> u64 {
        assert!(self.n <= 64, "configuration too large for a single index");
        self.words.first().copied().unwrap_or(0)
    }

    pub fn from_spins(spins: &[i8]) -> Result<Self> {
        let mut c = Self::all_down(spins.len());
        for (x, &s) in spins.iter().enumerate() {
            match s {
                1 => c.set(x, 1),
                -1 => {}
                other => return Err(Error::Invalid(format!("spin value {other} at site {x}"))),
            }
        }
        Ok(c)
    }

    pub fn to_spins(&self) -> Vec<i8> {
        (0..self.n).map(|x| self.get(x)).collect()
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn from_words(words: Vec<u64>, n: usize) -> Result<Self> {
        if words.len() != n.div_ceil(64) {
            return Err(Error::Shape(format!("{} words for {n} spins", words.len())));
        }
        let mut c = Self { words, n };
        if !n.is_multiple_of(64) {
            let last = c.words.len() - 1;
            c.words[last] &= (1u64 << (n % 64)) - 1;
        }
        Ok(c)
    }

    #[inline]
    pub fn get(&self, x: usize) -> i8 {
        if (self.words[x >> 6] >> (x & 63)) & 1 == 1 {
            1
        } else {
            -1
        }
    }

    #[inline]
    pub fn set(&mut self, x: usize, s: i8) {
        let bit = 1u64 << (x & 63);
        if s > 0 {
            self.words[x >> 6] |= bit;
        } else {
            self.words[x >> 6] &= !bit;
        }
    }

    #[inline]
    pub fn flip(&mut self, x: usize) {
        self.words[x >> 6] ^= 1u64 << (x & 63);
    }

    /// Global spin flip.
    pub fn flipped(&self) -> Self {
        let words = self.words.iter().map(|w| !w).collect();
        Self::from_words(words, self.n).expect("same shape")
    }

    /// Number of `+1` spins.
    pub fn count_up(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn overlap(&self, other: &Self) -> Result<Overlap> {
        if self.n != other.n {
            return Err(Error::Shape(format!("overlap of {} and {} spins", self.n, other.n)));
        }
        let disagree: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones())
            .sum();
        Ok(Overlap {
            dot: self.n as i64 - 2 * disagree as i64,
            n: self.n,
        })
    }
}

/// Exact overlap `dot / n` of two configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Overlap {
    pub dot: i64,
    pub n: usize,
}

impl Overlap {
    pub fn value(&self) -> f64 {
        self.dot as f64 / self.n as f64
    }
}

/// Boundary spin values `b_u ∈ [-1, 1]`, one per boundary bond.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryConfig {
    pub b: Vec<f64>,
}

impl BoundaryConfig {
    pub fn new(b: Vec<f64>) -> Result<Self> {
        if let Some((u, v)) = b.iter().enumerate().find(|(_, v)| !(-1.0..=1.0).contains(*v)) {
            return Err(Error::Invalid(format!("boundary value {v} at {u} outside [-1, 1]")));
        }
        Ok(Self { b })
    }

    /// Open boundary, `b ≡ 0`.
    pub fn open(n_boundary: usize) -> Self {
        Self {
            b: vec![0.0; n_boundary],
        }
    }

    /// Plus boundary, `b ≡ 1`.
    pub fn plus(n_boundary: usize) -> Self {
        Self {
            b: vec![1.0; n_boundary],
        }
    }

    /// Corner of `{-1,+1}^n` read from the bits of `mask`, where the most
    /// significant of the `n` bits is boundary index 0 and a set bit is `+1`.
    /// Increasing `mask` is then lexicographic order with `-1 < +1`.
    pub fn corner(mask: u64, n_boundary: usize) -> Self {
        let b = (0..n_boundary)
            .map(|u| {
                if (mask >> (n_boundary - 1 - u)) & 1 == 1 {
                    1.0
                } else {
                    -1.0
                }
            })
            .collect();
        Self { b }
    }

    pub fn len(&self) -> usize {
        self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }

    pub fn is_open(&self) -> bool {
        self.b.iter().all(|&v| v == 0.0)
    }
}

/// Inter-replica couplings: `lambda` between replicas 1 and 2, `lambda_prime`
/// between replicas 1 and 3.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ReplicaCoupling {
    pub lambda: f64,
    pub lambda_prime: f64,
}

impl ReplicaCoupling {
    pub fn new(lambda: f64, lambda_prime: f64) -> Result<Self> {
        if !lambda.is_finite() || !lambda_prime.is_finite() {
            return Err(Error::Invalid(format!("couplings ({lambda}, {lambda_prime}) not finite")));
        }
        Ok(Self {
            lambda,
            lambda_prime,
        })
    }

    pub fn pair(lambda: f64) -> Self {
        Self {
            lambda,
            lambda_prime: 0.0,
        }
    }

    pub fn swapped(&self) -> Self {
        Self {
            lambda: self.lambda_prime,
            lambda_prime: self.lambda,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn overlap_examples() {
        let a = SpinConfig::from_spins(&[1, -1, 1, 1]).unwrap();
        assert_eq!(a.overlap(&a).unwrap().value(), 1.0);
        assert_eq!(a.overlap(&a.flipped()).unwrap().value(), -1.0);
        let mut b = a.clone();
        b.flip(2);
        assert_eq!(a.overlap(&b).unwrap(), Overlap { dot: 2, n: 4 });
        assert_eq!(a.overlap(&b).unwrap().value(), 0.5);
    }

    #[test]
    fn shape_mismatch() {
        let a = SpinConfig::all_up(3);
        let b = SpinConfig::all_up(4);
        assert!(a.overlap(&b).is_err());
    }

    #[test]
    fn corner_order_is_lexicographic() {
        assert_eq!(BoundaryConfig::corner(0, 3).b, vec![-1.0, -1.0, -1.0]);
        assert_eq!(BoundaryConfig::corner(1, 3).b, vec![-1.0, -1.0, 1.0]);
        assert_eq!(BoundaryConfig::corner(4, 3).b, vec![1.0, -1.0, -1.0]);
    }

    #[test]
    fn boundary_range_checked() {
        assert!(BoundaryConfig::new(vec![0.5, -1.0, 1.0]).is_ok());
        assert!(BoundaryConfig::new(vec![1.5]).is_err());
    }

    proptest! {
        #[test]
        fn spins_roundtrip(v in proptest::collection::vec(prop_oneof![Just(1i8), Just(-1i8)], 1..150)) {
            let c = SpinConfig::from_spins(&v).unwrap();
            prop_assert_eq!(c.to_spins(), v.clone());
            let w = SpinConfig::from_words(c.words().to_vec(), v.len()).unwrap();
            prop_assert_eq!(w, c);
        }

        #[test]
        fn single_flip_moves_overlap_by_two_over_n(
            v in proptest::collection::vec(prop_oneof![Just(1i8), Just(-1i8)], 1..100),
            w_seed in any::<u64>(),
            site in any::<usize>(),
        ) {
            let a = SpinConfig::from_spins(&v).unwrap();
            let mut b = a.clone();
            for x in 0..v.len() {
                if (w_seed >> (x % 64)) & 1 == 1 { b.flip(x); }
            }
            let before = a.overlap(&b).unwrap();
            let x = site % v.len();
            b.flip(x);
            let after = a.overlap(&b).unwrap();
            prop_assert_eq!((after.dot - before.dot).abs(), 2);
        }
    }
}
