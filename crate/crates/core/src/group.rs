//! Residue arithmetic in Z_N and subsets of Z_N.

use std::fmt;

use num_rational::BigRational;
use num_bigint::BigInt;

use crate::error::{Error, Result};

/// The cyclic group Z_N. Residues are always kept in `[0, N)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CyclicGroup {
    modulus: u64,
}

impl CyclicGroup {
    pub fn new(modulus: u64) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::input("modulus must be at least 1"));
        }
        Ok(CyclicGroup { modulus })
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.modulus as usize
    }

    #[inline]
    pub fn reduce(&self, x: i128) -> u64 {
        x.rem_euclid(self.modulus as i128) as u64
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        ((a as u128 + b as u128) % self.modulus as u128) as u64
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        ((a as u128 + self.modulus as u128 - (b % self.modulus) as u128) % self.modulus as u128) as u64
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.modulus as u128) as u64
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.modulus - a
        }
    }

    /// `c * a mod N` for a signed coefficient.
    #[inline]
    pub fn scale(&self, c: i64, a: u64) -> u64 {
        self.reduce(c as i128 * a as i128)
    }

    /// Multiplicative inverse, if `gcd(a, N) = 1`.
    pub fn inverse(&self, a: u64) -> Option<u64> {
        let n = self.modulus as i128;
        let (mut r0, mut r1) = (n, (a % self.modulus) as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        if r0 != 1 {
            return if self.modulus == 1 { Some(0) } else { None };
        }
        Some(t0.rem_euclid(n) as u64)
    }

    /// Distance from `x/N` to the nearest integer, scaled by N: `min(x, N - x)`.
    #[inline]
    pub fn circle_distance(&self, x: u64) -> u64 {
        let x = x % self.modulus;
        x.min(self.modulus - x)
    }
}

/// A subset of Z_N stored as a bit vector of length N.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ResidueSet {
    group: CyclicGroup,
    words: Vec<u64>,
}

impl ResidueSet {
    pub fn empty(group: CyclicGroup) -> Self {
        let words = vec![0u64; group.order().div_ceil(64)];
        ResidueSet { group, words }
    }

    pub fn full(group: CyclicGroup) -> Self {
        let mut s = Self::empty(group);
        for x in 0..group.modulus() {
            s.insert(x);
        }
        s
    }

    /// Builds a set from arbitrary integers, reducing each mod N.
    pub fn from_residues<I: IntoIterator<Item = i128>>(group: CyclicGroup, items: I) -> Self {
        let mut s = Self::empty(group);
        for x in items {
            s.insert(group.reduce(x));
        }
        s
    }

    pub fn from_slice(group: CyclicGroup, items: &[u64]) -> Self {
        Self::from_residues(group, items.iter().map(|&x| x as i128))
    }

    /// The subset of Z_N whose members are the set bits of `mask` (N ≤ 64).
    pub fn from_mask(group: CyclicGroup, mask: u64) -> Self {
        assert!(group.modulus() <= 64);
        let mut s = Self::empty(group);
        if !s.words.is_empty() {
            s.words[0] = if group.modulus() == 64 {
                mask
            } else {
                mask & ((1u64 << group.modulus()) - 1)
            };
        }
        s
    }

    /// Builds a set from a membership predicate evaluated on every residue.
    pub fn from_predicate(group: CyclicGroup, mut keep: impl FnMut(u64) -> bool) -> Self {
        let mut s = Self::empty(group);
        for x in 0..group.modulus() {
            if keep(x) {
                s.insert(x);
            }
        }
        s
    }

    #[inline]
    pub fn group(&self) -> CyclicGroup {
        self.group
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.group.modulus()
    }

    #[inline]
    pub fn contains(&self, x: u64) -> bool {
        let x = x % self.group.modulus();
        self.words[(x / 64) as usize] >> (x % 64) & 1 == 1
    }

    pub fn insert(&mut self, x: u64) {
        let x = x % self.group.modulus();
        self.words[(x / 64) as usize] |= 1 << (x % 64);
    }

    pub fn remove(&mut self, x: u64) {
        let x = x % self.group.modulus();
        self.words[(x / 64) as usize] &= !(1 << (x % 64));
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Members in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as u64;
                    w &= w - 1;
                    Some(i as u64 * 64 + b)
                }
            })
        })
    }

    pub fn to_vec(&self) -> Vec<u64> {
        self.iter().collect()
    }

    /// 0/1 indicator as a real vector of length N.
    pub fn indicator(&self) -> Vec<f64> {
        (0..self.modulus())
            .map(|x| if self.contains(x) { 1.0 } else { 0.0 })
            .collect()
    }

    /// |A| / N as an exact rational.
    pub fn density_exact(&self) -> BigRational {
        BigRational::new(BigInt::from(self.len()), BigInt::from(self.modulus()))
    }

    pub fn density(&self) -> f64 {
        self.len() as f64 / self.modulus() as f64
    }

    pub fn negate(&self) -> ResidueSet {
        let g = self.group;
        let mut out = ResidueSet::empty(g);
        for x in self.iter() {
            out.insert(g.neg(x));
        }
        out
    }

    pub fn is_symmetric(&self) -> bool {
        self.iter().all(|x| self.contains(self.group.neg(x)))
    }

    pub fn is_subset(&self, other: &ResidueSet) -> bool {
        self.group == other.group
            && self
                .words
                .iter()
                .zip(&other.words)
                .all(|(a, b)| a & !b == 0)
    }

    pub fn union(&self, other: &ResidueSet) -> ResidueSet {
        assert_eq!(self.group, other.group);
        let words = self.words.iter().zip(&other.words).map(|(a, b)| a | b).collect();
        ResidueSet { group: self.group, words }
    }

    pub fn intersection(&self, other: &ResidueSet) -> ResidueSet {
        assert_eq!(self.group, other.group);
        let words = self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect();
        ResidueSet { group: self.group, words }
    }

    pub fn difference(&self, other: &ResidueSet) -> ResidueSet {
        assert_eq!(self.group, other.group);
        let words = self.words.iter().zip(&other.words).map(|(a, b)| a & !b).collect();
        ResidueSet { group: self.group, words }
    }

    pub fn without(&self, x: u64) -> ResidueSet {
        let mut s = self.clone();
        s.remove(x);
        s
    }

    /// `{c·a : a ∈ A}`.
    pub fn dilate(&self, c: u64) -> ResidueSet {
        let g = self.group;
        ResidueSet::from_residues(g, self.iter().map(|a| g.mul(c, a) as i128))
    }

    /// `{a + t : a ∈ A}`.
    pub fn translate(&self, t: u64) -> ResidueSet {
        let g = self.group;
        ResidueSet::from_residues(g, self.iter().map(|a| g.add(a, t) as i128))
    }
}

impl fmt::Debug for ResidueSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Z_{}", self.modulus())?;
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::Display for ResidueSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.iter().map(|x| x.to_string()).collect();
        write!(f, "{{{}}}", items.join(","))
    }
}

/// Iterates over every subset of Z_N (N ≤ 30) in mask order.
pub fn all_subsets(group: CyclicGroup) -> impl Iterator<Item = ResidueSet> {
    assert!(group.modulus() <= 30, "exhaustive enumeration limited to N <= 30");
    (0u64..(1u64 << group.modulus())).map(move |m| ResidueSet::from_mask(group, m))
}
