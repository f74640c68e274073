//! Dense Fock-space reference implementations, used only by tests.
//!
//! Everything here works on the full 2^(2M) Jordan-Wigner space with
//! explicit creation/annihilation operator action, deliberately sharing no
//! code with the determinant or LUCJ kernels it checks. Mode `p` is spin-alpha
//! orbital `p`, mode `M + p` is spin-beta orbital `p`; Fock index bit `j`
//! is the occupation of mode `j`.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Applies `a_j`; returns the sign and the new occupation index.
pub fn annihilate(j: usize, state: usize) -> Option<(f64, usize)> {
    if state >> j & 1 == 0 {
        return None;
    }
    let below = (state & ((1usize << j) - 1)).count_ones();
    let sign = if below.is_multiple_of(2) { 1.0 } else { -1.0 };
    Some((sign, state ^ (1 << j)))
}

/// Applies `a_j^dagger`.
pub fn create(j: usize, state: usize) -> Option<(f64, usize)> {
    if state >> j & 1 == 1 {
        return None;
    }
    let below = (state & ((1usize << j) - 1)).count_ones();
    let sign = if below.is_multiple_of(2) { 1.0 } else { -1.0 };
    Some((sign, state | (1 << j)))
}

/// `a+_p a+_q a_s a_r |state>` with modes given as spin-orbital indices.
fn two_body(p: usize, q: usize, s: usize, r: usize, state: usize) -> Option<(f64, usize)> {
    let (s1, st) = annihilate(r, state)?;
    let (s2, st) = annihilate(s, st)?;
    let (s3, st) = create(q, st)?;
    let (s4, st) = create(p, st)?;
    Some((s1 * s2 * s3 * s4, st))
}

fn one_body(p: usize, r: usize, state: usize) -> Option<(f64, usize)> {
    let (s1, st) = annihilate(r, state)?;
    let (s2, st) = create(p, st)?;
    Some((s1 * s2, st))
}

/// Full second-quantized electronic Hamiltonian on the 4^M Fock space:
/// `E_core + sum h_pr a+_ps a_rs + 1/2 sum (pr|qs) a+_ps a+_qt a_st a_rs`.
pub fn fock_hamiltonian(
    m: usize,
    e_core: f64,
    h: &dyn Fn(usize, usize) -> f64,
    g: &dyn Fn(usize, usize, usize, usize) -> f64,
) -> DMatrix<f64> {
    let dim = 1usize << (2 * m);
    let mut mat = DMatrix::<f64>::zeros(dim, dim);
    for state in 0..dim {
        mat[(state, state)] += e_core;
        for sigma in 0..2 {
            for p in 0..m {
                for r in 0..m {
                    let v = h(p, r);
                    if v == 0.0 {
                        continue;
                    }
                    if let Some((sgn, out)) = one_body(p + sigma * m, r + sigma * m, state) {
                        mat[(out, state)] += sgn * v;
                    }
                }
            }
        }
        for sigma in 0..2 {
            for tau in 0..2 {
                for p in 0..m {
                    for r in 0..m {
                        for q in 0..m {
                            for s in 0..m {
                                let v = g(p, r, q, s);
                                if v == 0.0 {
                                    continue;
                                }
                                let (ps, rs) = (p + sigma * m, r + sigma * m);
                                let (qt, st) = (q + tau * m, s + tau * m);
                                if let Some((sgn, out)) = two_body(ps, qt, st, rs, state) {
                                    mat[(out, state)] += 0.5 * sgn * v;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    mat
}

/// Fock indices with exactly `na` alpha and `nb` beta electrons, ascending.
pub fn sector_states(m: usize, na: usize, nb: usize) -> Vec<usize> {
    let mask = (1usize << m) - 1;
    (0..1usize << (2 * m))
        .filter(|&s| (s & mask).count_ones() as usize == na && (s >> m).count_ones() as usize == nb)
        .collect()
}

/// `(alpha mask, beta mask)` of a Fock index.
pub fn split(m: usize, state: usize) -> (u64, u64) {
    let mask = (1usize << m) - 1;
    ((state & mask) as u64, (state >> m) as u64)
}

pub fn join(m: usize, alpha: u64, beta: u64) -> usize {
    alpha as usize | ((beta as usize) << m)
}

/// Spin-summed one-body operator `sum_{pq,s} k_pq a+_ps a_qs`.
pub fn fock_one_body(m: usize, k: &dyn Fn(usize, usize) -> f64) -> DMatrix<f64> {
    let dim = 1usize << (2 * m);
    let mut mat = DMatrix::<f64>::zeros(dim, dim);
    for state in 0..dim {
        for sigma in 0..2 {
            for p in 0..m {
                for q in 0..m {
                    let v = k(p, q);
                    if v == 0.0 {
                        continue;
                    }
                    if let Some((sgn, out)) = one_body(p + sigma * m, q + sigma * m, state) {
                        mat[(out, state)] += sgn * v;
                    }
                }
            }
        }
    }
    mat
}

/// Number operator `a+_j a_j` as a dense matrix.
pub fn fock_number(m: usize, mode: usize) -> DMatrix<f64> {
    let dim = 1usize << (2 * m);
    let mut mat = DMatrix::<f64>::zeros(dim, dim);
    for state in 0..dim {
        if let Some((s1, st)) = annihilate(mode, state) {
            if let Some((s2, st)) = create(mode, st) {
                mat[(st, state)] += s1 * s2;
            }
        }
    }
    mat
}

/// Matrix exponential by scaling and squaring of a truncated Taylor series.
pub fn expm(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = a.nrows();
    let norm: f64 = (0..n).map(|i| (0..n).map(|j| a[(i, j)].norm()).sum::<f64>()).fold(0.0, f64::max);
    let mut squarings = 0u32;
    let mut scale = 1.0;
    while norm * scale > 0.25 {
        scale *= 0.5;
        squarings += 1;
    }
    let scaled = a.map(|z| z * scale);
    let mut result = DMatrix::<Complex64>::identity(n, n);
    let mut term = DMatrix::<Complex64>::identity(n, n);
    for k in 1..=30 {
        term = &term * &scaled / Complex64::new(k as f64, 0.0);
        result += &term;
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

pub fn to_complex(a: &DMatrix<f64>) -> DMatrix<Complex64> {
    a.map(|x| Complex64::new(x, 0.0))
}

/// Lowest eigenvalue of the sector block of a Fock-space operator.
pub fn sector_ground_energy(full: &DMatrix<f64>, states: &[usize]) -> f64 {
    let d = states.len();
    let block = DMatrix::from_fn(d, d, |i, j| full[(states[i], states[j])]);
    block.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
}
