//! Benchmark arithmetic: CCSD parameter counts and subspace sizes,
//! sample-quality diagnostics, energy error tables and whisker statistics.

mod stats;
mod tables;

use serde::{Deserialize, Serialize};

pub use stats::{quantile, stat_profile, stat_profile_labelled, Outlier, StatProfile};
pub use tables::{
    class_averages, energy_errors, profiles_csv, reaction_energy_errors, ClassAverage, EnergyError, EnergyTable,
    Reaction, ReactionClass, ReactionError, ReactionTable,
};

use crate::lucj::SampleSet;

/// Subspace fractions of the standard ladder.
pub const DEFAULT_ZETAS: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];

/// Binomial coefficient; exact for the orbital counts handled here.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Dimension of the fixed-(n_alpha, n_beta) sector.
pub fn sector_dimension(norb: usize, n_alpha: usize, n_beta: usize) -> u128 {
    binomial(norb, n_alpha) * binomial(norb, n_beta)
}

/// Number of CCSD parameters, counted term by term: unrestricted singles,
/// same-spin and opposite-spin doubles when `n_alpha != n_beta`; singles and
/// ordered double pairs otherwise.
pub fn ccsd_param_count(n_alpha: usize, n_beta: usize, norb: usize) -> u64 {
    let n_alpha = n_alpha.min(norb);
    let n_beta = n_beta.min(norb);
    let (va, vb) = (norb - n_alpha, norb - n_beta);
    if n_alpha != n_beta {
        let same = |n: usize, v: usize| (n * v + n * n.saturating_sub(1) / 2 * (v * v.saturating_sub(1) / 2)) as u64;
        1 + same(n_alpha, va) + same(n_beta, vb) + (n_alpha * va * n_beta * vb) as u64
    } else {
        let mut pairs = 0u64;
        for i in 0..n_alpha {
            for j in i + 1..n_alpha {
                for a in 0..va {
                    for b in a + 1..va {
                        if (a, i) <= (b, j) {
                            pairs += 1;
                        }
                    }
                }
            }
        }
        1 + (n_alpha * va) as u64 + pairs
    }
}

/// `d = ceil(zeta * n_ccsd)` for each fraction, clamped to `[1, full_dim]`.
pub fn subspace_plan(n_ccsd: u64, zetas: &[f64], full_dim: Option<u128>) -> Vec<usize> {
    zetas
        .iter()
        .map(|&z| {
            let raw = z * n_ccsd as f64;
            // guard against 0.25 * 4 = 1.0000000000000002 style products
            let d = (raw - 1e-9 * raw.abs().max(1.0)).ceil().max(1.0) as u128;
            full_dim.map_or(d, |f| d.min(f.max(1))) as usize
        })
        .collect()
}

/// Sample-quality metrics of a bitstring set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleDiagnostics {
    pub n_shots: u64,
    /// Fraction of shots with both electron counts correct.
    pub p_hw: f64,
    /// Fraction of shots with the correct total electron count.
    pub p_total: f64,
    /// Probability that a uniformly random bitstring has both counts correct.
    pub p_unif: f64,
    /// Alpha-correct fraction minus beta-correct fraction.
    pub f_sz: f64,
}

pub fn uniform_probability(norb: usize, n_alpha: usize, n_beta: usize) -> f64 {
    sector_dimension(norb, n_alpha, n_beta) as f64 / 4f64.powi(norb as i32)
}

pub fn sample_diagnostics(samples: &SampleSet, n_alpha: usize, n_beta: usize) -> SampleDiagnostics {
    let (mut both, mut total, mut alpha, mut beta) = (0u64, 0u64, 0u64, 0u64);
    for (d, &c) in samples.iter() {
        let (a_ok, b_ok) = (d.n_alpha() == n_alpha, d.n_beta() == n_beta);
        both += c * (a_ok && b_ok) as u64;
        alpha += c * a_ok as u64;
        beta += c * b_ok as u64;
        total += c * (d.n_alpha() + d.n_beta() == n_alpha + n_beta) as u64;
    }
    let n = samples.n_shots;
    let frac = |k: u64| if n == 0 { 0.0 } else { k as f64 / n as f64 };
    SampleDiagnostics {
        n_shots: n,
        p_hw: frac(both),
        p_total: frac(total),
        p_unif: uniform_probability(samples.norb, n_alpha, n_beta),
        f_sz: frac(alpha) - frac(beta),
    }
}
