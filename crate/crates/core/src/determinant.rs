//! Slater determinants as per-spin occupation bitmasks and their
//! Hamiltonian matrix elements.
//!
//! Phase convention: a determinant is the ordered product of creation
//! operators, alpha before beta and ascending orbital index within each spin,
//! acting on the vacuum. This matches a Jordan-Wigner ordering where all
//! alpha spin-orbitals precede the beta ones.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrals::IntegralSet;

/// Occupation bitstring; bit `p` of `alpha` (`beta`) set means orbital `p`
/// holds a spin-alpha (spin-beta) electron.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Determinant {
    pub alpha: u64,
    pub beta: u64,
}

impl Determinant {
    pub const fn new(alpha: u64, beta: u64) -> Self {
        Self { alpha, beta }
    }

    /// Lowest `n_alpha` / `n_beta` orbitals occupied.
    pub fn hartree_fock(n_alpha: usize, n_beta: usize) -> Self {
        Self::new(low_mask(n_alpha), low_mask(n_beta))
    }

    pub fn from_orbitals(alpha: &[usize], beta: &[usize]) -> Self {
        let fold = |o: &[usize]| o.iter().fold(0u64, |m, &p| m | 1 << p);
        Self::new(fold(alpha), fold(beta))
    }

    pub fn n_alpha(&self) -> usize {
        self.alpha.count_ones() as usize
    }

    pub fn n_beta(&self) -> usize {
        self.beta.count_ones() as usize
    }

    pub fn fits(&self, norb: usize) -> bool {
        let mask = low_mask(norb);
        self.alpha & !mask == 0 && self.beta & !mask == 0
    }

    /// 2M characters of `0`/`1`, alpha half first, orbital 0 leftmost.
    pub fn to_bitstring(&self, norb: usize) -> String {
        let mut s = String::with_capacity(2 * norb);
        for mask in [self.alpha, self.beta] {
            for p in 0..norb {
                s.push(if mask >> p & 1 == 1 { '1' } else { '0' });
            }
        }
        s
    }

    /// Inverse of [`Determinant::to_bitstring`]; returns the orbital count too.
    pub fn parse_bitstring(s: &str) -> Result<(Self, usize)> {
        let bytes = s.as_bytes();
        if !bytes.len().is_multiple_of(2) || bytes.len() > 128 {
            return Err(Error::Configuration(format!("bitstring `{s}` must have even length at most 128")));
        }
        let norb = bytes.len() / 2;
        let mut masks = [0u64; 2];
        for (i, &b) in bytes.iter().enumerate() {
            let bit = match b {
                b'0' => 0,
                b'1' => 1,
                _ => return Err(Error::Configuration(format!("bitstring `{s}` contains `{}`", b as char))),
            };
            masks[i / norb] |= bit << (i % norb);
        }
        Ok((Self::new(masks[0], masks[1]), norb))
    }
}

impl fmt::Display for Determinant {
    /// Compact form without a fixed width, highest set orbital decides length.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bits = 64 - (self.alpha | self.beta).leading_zeros() as usize;
        f.write_str(&self.to_bitstring(bits.max(1)))
    }
}

impl FromStr for Determinant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse_bitstring(s).map(|(d, _)| d)
    }
}

#[inline]
pub(crate) fn low_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Set bit positions, ascending.
#[inline]
pub fn bits(mut mask: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let p = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            Some(p)
        }
    })
}

/// Sign of `a_p` acting on `mask`: parity of occupied orbitals below `p`.
#[inline]
fn parity_below(mask: u64, p: usize) -> f64 {
    if (mask & low_mask(p)).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Sign of `a+_p a_r` on `mask` (r occupied, p empty after removal).
#[inline]
fn single_sign(mask: u64, p: usize, r: usize) -> f64 {
    let s1 = parity_below(mask, r);
    let m = mask ^ (1 << r);
    s1 * parity_below(m, p)
}

/// Sign of `a+_p a+_q a_s a_r` on `mask`.
#[inline]
fn double_sign(mask: u64, p: usize, q: usize, s: usize, r: usize) -> f64 {
    let mut sign = parity_below(mask, r);
    let mut m = mask ^ (1 << r);
    sign *= parity_below(m, s);
    m ^= 1 << s;
    sign *= parity_below(m, q);
    m ^= 1 << q;
    sign * parity_below(m, p)
}

pub fn excitation_degree(a: &Determinant, b: &Determinant) -> usize {
    (((a.alpha ^ b.alpha).count_ones() + (a.beta ^ b.beta).count_ones()) / 2) as usize
}

/// `<a|H|b>` by the Slater-Condon rules. The core energy enters only on the
/// diagonal; determinants more than two excitations apart give exactly 0.
pub fn slater_condon(a: &Determinant, b: &Determinant, ints: &IntegralSet) -> Result<f64> {
    let n = ints.norb();
    if !a.fits(n) || !b.fits(n) {
        return Err(Error::Shape(format!("determinant has orbitals beyond M = {n}")));
    }
    Ok(matrix_element(a, b, ints))
}

/// Unchecked version of [`slater_condon`] for assembled-matrix hot loops.
pub fn matrix_element(a: &Determinant, b: &Determinant, ints: &IntegralSet) -> f64 {
    let da = (a.alpha ^ b.alpha).count_ones();
    let db = (a.beta ^ b.beta).count_ones();
    match (da, db) {
        (0, 0) => diagonal(a, ints),
        (2, 0) => single(a.alpha, b.alpha, b.alpha, b.beta, ints),
        (0, 2) => single(a.beta, b.beta, b.beta, b.alpha, ints),
        (4, 0) => same_spin_double(a.alpha, b.alpha, ints),
        (0, 4) => same_spin_double(a.beta, b.beta, ints),
        (2, 2) => {
            let (i, p) = moved(a.alpha, b.alpha);
            let (j, q) = moved(a.beta, b.beta);
            single_sign(b.alpha, p, i) * single_sign(b.beta, q, j) * ints.two_electron(p, i, q, j)
        }
        _ => 0.0,
    }
}

/// `(hole in b, particle in a)` for a single move within one spin.
#[inline]
fn moved(a: u64, b: u64) -> (usize, usize) {
    ((b & !a).trailing_zeros() as usize, (a & !b).trailing_zeros() as usize)
}

pub fn diagonal(d: &Determinant, ints: &IntegralSet) -> f64 {
    let mut e = ints.e_core();
    for mask in [d.alpha, d.beta] {
        for i in bits(mask) {
            e += ints.one_electron(i, i);
            for j in bits(mask & !low_mask(i + 1)) {
                e += ints.two_electron(i, i, j, j) - ints.two_electron(i, j, j, i);
            }
        }
    }
    for i in bits(d.alpha) {
        for j in bits(d.beta) {
            e += ints.two_electron(i, i, j, j);
        }
    }
    e
}

fn single(a_same: u64, b_same: u64, same: u64, other: u64, ints: &IntegralSet) -> f64 {
    let (i, p) = moved(a_same, b_same);
    let mut v = ints.one_electron(p, i);
    for k in bits(same) {
        v += ints.two_electron(p, i, k, k) - ints.two_electron(p, k, k, i);
    }
    for k in bits(other) {
        v += ints.two_electron(p, i, k, k);
    }
    single_sign(same, p, i) * v
}

fn same_spin_double(a: u64, b: u64, ints: &IntegralSet) -> f64 {
    let holes = b & !a;
    let parts = a & !b;
    let r = holes.trailing_zeros() as usize;
    let s = (holes & (holes - 1)).trailing_zeros() as usize;
    let p = parts.trailing_zeros() as usize;
    let q = (parts & (parts - 1)).trailing_zeros() as usize;
    double_sign(b, p, q, s, r) * (ints.two_electron(p, r, q, s) - ints.two_electron(p, s, q, r))
}

/// All single and double excitations of `a` within `norb` orbitals.
pub fn enumerate_connected(a: &Determinant, norb: usize) -> Vec<Determinant> {
    let full = low_mask(norb);
    let mut out = Vec::new();
    let singles = |mask: u64| -> Vec<u64> {
        let mut v = Vec::new();
        for i in bits(mask) {
            for p in bits(full & !mask) {
                v.push(mask ^ (1 << i) ^ (1 << p));
            }
        }
        v
    };
    let doubles = |mask: u64| -> Vec<u64> {
        let mut v = Vec::new();
        let virt = full & !mask;
        for i in bits(mask) {
            for j in bits(mask & !low_mask(i + 1)) {
                for p in bits(virt) {
                    for q in bits(virt & !low_mask(p + 1)) {
                        v.push(mask ^ (1 << i) ^ (1 << j) ^ (1 << p) ^ (1 << q));
                    }
                }
            }
        }
        v
    };
    let sa = singles(a.alpha);
    let sb = singles(a.beta);
    out.extend(sa.iter().map(|&x| Determinant::new(x, a.beta)));
    out.extend(sb.iter().map(|&y| Determinant::new(a.alpha, y)));
    out.extend(doubles(a.alpha).into_iter().map(|x| Determinant::new(x, a.beta)));
    out.extend(doubles(a.beta).into_iter().map(|y| Determinant::new(a.alpha, y)));
    for &x in &sa {
        for &y in &sb {
            out.push(Determinant::new(x, y));
        }
    }
    out
}

/// Ordered, duplicate-free set of determinants of fixed spin populations.
#[derive(Clone, Debug, PartialEq)]
pub struct DeterminantBasis {
    dets: Vec<Determinant>,
    index: HashMap<Determinant, usize>,
    norb: usize,
    n_alpha: usize,
    n_beta: usize,
}

impl DeterminantBasis {
    /// Sorts and deduplicates `dets`; every member must carry
    /// `(n_alpha, n_beta)` electrons within `norb` orbitals.
    pub fn new(mut dets: Vec<Determinant>, norb: usize, n_alpha: usize, n_beta: usize) -> Result<Self> {
        for d in &dets {
            if d.n_alpha() != n_alpha || d.n_beta() != n_beta || !d.fits(norb) {
                return Err(Error::Configuration(format!(
                    "determinant {} does not have ({n_alpha}, {n_beta}) electrons in {norb} orbitals",
                    d.to_bitstring(norb)
                )));
            }
        }
        dets.sort_unstable();
        dets.dedup();
        let index = dets.iter().enumerate().map(|(i, d)| (*d, i)).collect();
        Ok(Self { dets, index, norb, n_alpha, n_beta })
    }

    /// Complete space of all `C(M, n_alpha) * C(M, n_beta)` determinants.
    pub fn full(norb: usize, n_alpha: usize, n_beta: usize) -> Result<Self> {
        let a = strings(norb, n_alpha);
        let b = strings(norb, n_beta);
        let dets = a.iter().flat_map(|&x| b.iter().map(move |&y| Determinant::new(x, y))).collect();
        Self::new(dets, norb, n_alpha, n_beta)
    }

    pub fn len(&self) -> usize {
        self.dets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dets.is_empty()
    }

    pub fn dets(&self) -> &[Determinant] {
        &self.dets
    }

    pub fn position(&self, d: &Determinant) -> Option<usize> {
        self.index.get(d).copied()
    }

    pub fn contains(&self, d: &Determinant) -> bool {
        self.index.contains_key(d)
    }

    pub fn norb(&self) -> usize {
        self.norb
    }

    pub fn n_alpha(&self) -> usize {
        self.n_alpha
    }

    pub fn n_beta(&self) -> usize {
        self.n_beta
    }
}

/// All `norb`-bit masks with `n` bits set, ascending.
pub fn strings(norb: usize, n: usize) -> Vec<u64> {
    if n > norb {
        return Vec::new();
    }
    if n == 0 {
        return vec![0];
    }
    let mut out = Vec::new();
    let mut x = low_mask(n);
    let limit = if norb >= 64 { u64::MAX } else { 1u64 << norb };
    loop {
        out.push(x);
        // Gosper's hack
        let c = x & x.wrapping_neg();
        let r = x.wrapping_add(c);
        if r == 0 {
            break;
        }
        x = (((r ^ x) >> 2) / c) | r;
        if norb < 64 && x >= limit {
            break;
        }
    }
    out
}
