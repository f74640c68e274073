//! Deterministic fixtures shared by the benchmarks.

use sqdforge::lucj::Amplitudes;
use sqdforge::IntegralSet;

/// Smooth pseudo-random value in `[-1, 1]` for an index tuple.
fn wobble(k: usize) -> f64 {
    ((k as f64 * 12.9898).sin() * 43758.5453).fract()
}

/// Integrals with a dominant, increasing orbital diagonal and weak coupling.
pub fn integrals(norb: usize, n_alpha: usize, n_beta: usize) -> IntegralSet {
    let mut ints = IntegralSet::zeros(norb, n_alpha, n_beta).expect("valid sizes");
    for p in 0..norb {
        for r in 0..=p {
            let v = if p == r { -2.0 + 0.5 * p as f64 } else { 0.05 * wobble(p * 131 + r) };
            ints.set_one_electron(p, r, v).unwrap();
        }
    }
    let entries: Vec<_> = ints.canonical_two_electron().map(|(p, r, q, s, _)| (p, r, q, s)).collect();
    for (n, (p, r, q, s)) in entries.into_iter().enumerate() {
        let v = if p == r && q == s { 0.5 + 0.1 * wobble(n).abs() } else { 0.02 * wobble(n + 7) };
        ints.set_two_electron(p, r, q, s, v).unwrap();
    }
    ints
}

pub fn amplitudes(norb: usize, n_occ: usize) -> Amplitudes {
    let mut amps = Amplitudes::zeros(norb, n_occ, n_occ).expect("valid sizes");
    let nv = amps.n_vir;
    for i in 0..n_occ {
        for j in 0..n_occ {
            for a in 0..nv {
                for b in 0..nv {
                    if (i, a) <= (j, b) {
                        let v = 0.1 * wobble(((i * n_occ + j) * nv + a) * nv + b);
                        amps.set_t2(i, j, a, b, v).unwrap();
                        amps.set_t2(j, i, b, a, v).unwrap();
                    }
                }
            }
        }
    }
    amps
}
