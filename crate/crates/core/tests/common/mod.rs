#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sqdforge::lucj::Amplitudes;
use sqdforge::IntegralSet;

#[path = "../../src/oracle.rs"]
pub mod oracle;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Integrals with every canonical entry drawn uniformly; no physical
/// structure, which stresses the sign bookkeeping.
pub fn random_integrals(norb: usize, na: usize, nb: usize, seed: u64) -> IntegralSet {
    let mut r = rng(seed);
    let mut ints = IntegralSet::zeros(norb, na, nb).unwrap();
    ints.set_e_core(r.random_range(-1.0..1.0));
    for p in 0..norb {
        for q in 0..=p {
            ints.set_one_electron(p, q, r.random_range(-1.0..1.0)).unwrap();
        }
    }
    let canon: Vec<_> = ints.canonical_two_electron().map(|e| (e.0, e.1, e.2, e.3)).collect();
    for (p, q, s, t) in canon {
        ints.set_two_electron(p, q, s, t, r.random_range(-0.5..0.5)).unwrap();
    }
    ints
}

/// Integrals whose Hartree-Fock determinant dominates the ground state.
pub fn molecular_integrals(norb: usize, na: usize, nb: usize, seed: u64) -> IntegralSet {
    let mut r = rng(seed);
    let mut ints = IntegralSet::zeros(norb, na, nb).unwrap();
    ints.set_e_core(r.random_range(0.5..1.5));
    for p in 0..norb {
        for q in 0..=p {
            let v = if p == q { -2.0 + 0.8 * p as f64 } else { r.random_range(-0.1..0.1) };
            ints.set_one_electron(p, q, v).unwrap();
        }
    }
    let canon: Vec<_> = ints.canonical_two_electron().map(|e| (e.0, e.1, e.2, e.3)).collect();
    for (p, q, s, t) in canon {
        let v = if p == q && s == t { r.random_range(0.4..0.7) } else { r.random_range(-0.05..0.05) };
        ints.set_two_electron(p, q, s, t, v).unwrap();
    }
    ints
}

pub fn random_amplitudes(norb: usize, na: usize, nb: usize, seed: u64, scale: f64) -> Amplitudes {
    let mut r = rng(seed);
    let mut amps = Amplitudes::zeros(norb, na, nb).unwrap();
    let (n_occ, nv) = (amps.n_occ, amps.n_vir);
    for i in 0..n_occ {
        for j in 0..n_occ {
            for a in 0..nv {
                for b in 0..nv {
                    if (i, a) <= (j, b) {
                        let v = r.random_range(-scale..scale);
                        amps.set_t2(i, j, a, b, v).unwrap();
                        amps.set_t2(j, i, b, a, v).unwrap();
                    }
                }
            }
        }
    }
    amps
}

pub fn fock_hamiltonian(ints: &IntegralSet) -> DMatrix<f64> {
    oracle::fock_hamiltonian(ints.norb(), ints.e_core(), &|p, r| ints.one_electron(p, r), &|p, r, q, s| {
        ints.two_electron(p, r, q, s)
    })
}

/// Sector block of the dense Fock-space Hamiltonian, rows in `states` order.
pub fn sector_block(ints: &IntegralSet, states: &[usize]) -> DMatrix<f64> {
    let full = fock_hamiltonian(ints);
    DMatrix::from_fn(states.len(), states.len(), |i, j| full[(states[i], states[j])])
}

pub fn dense_fci(ints: &IntegralSet) -> f64 {
    let states = oracle::sector_states(ints.norb(), ints.n_alpha(), ints.n_beta());
    oracle::sector_ground_energy(&fock_hamiltonian(ints), &states)
}

/// Quantile by inclusive linear interpolation, computed from ranks.
pub fn quantile_oracle(values: &[f64], p: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let h = (v.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}
