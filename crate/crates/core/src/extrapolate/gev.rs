//! Lowest-energy recombination of same-fraction wavefunctions through a
//! canonically orthogonalized generalized eigenproblem.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use super::{as_pairs, ols_fit, Diagnostics, ExtrapolationResult, Method, ZERO_VARIANCE};
use crate::determinant::DeterminantBasis;
use crate::error::{Error, Result};
use crate::integrals::IntegralSet;
use crate::subspace::{
    dense_lowest, energy_and_variance, fix_sign, project_hamiltonian, EnergyVariancePoint, SubspaceWavefunction,
};

/// Overlap eigenvalues below this are dropped.
pub const DEFAULT_EPSILON: f64 = 1e-5;

const KAPPA_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct GevOutcome {
    pub wavefunction: SubspaceWavefunction,
    /// Lowest generalized eigenvalue.
    pub eigenvalue: f64,
    pub kept: usize,
    pub truncated: usize,
}

/// Lowest generalized eigenvector of `(H_mn, S_mn)` over `states`, expressed
/// on the union of their bases.
pub fn gev_combine(states: &[SubspaceWavefunction], ints: &IntegralSet, epsilon: f64) -> Result<GevOutcome> {
    let first = states.first().ok_or_else(|| Error::Consistency("no states to combine".into()))?;
    let (m, na, nb) = (first.basis().norb(), first.basis().n_alpha(), first.basis().n_beta());
    if states.iter().any(|s| (s.basis().norb(), s.basis().n_alpha(), s.basis().n_beta()) != (m, na, nb)) {
        return Err(Error::Consistency("states live in different sectors".into()));
    }
    let union =
        DeterminantBasis::new(states.iter().flat_map(|s| s.basis().dets().iter().copied()).collect(), m, na, nb)?;
    let embedded: Vec<Vec<f64>> = states
        .iter()
        .map(|s| {
            let mut v = vec![0.0; union.len()];
            for (d, c) in s.basis().dets().iter().zip(s.coeffs()) {
                v[union.position(d).expect("subset of the union")] = *c;
            }
            v
        })
        .collect();
    let h = project_hamiltonian(&union, ints);
    let images: Vec<Vec<f64>> = embedded.iter().map(|v| h.matvec(v)).collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let n = states.len();
    let hm = DMatrix::from_fn(n, n, |i, j| 0.5 * (dot(&embedded[i], &images[j]) + dot(&embedded[j], &images[i])));
    let sm = DMatrix::from_fn(n, n, |i, j| dot(&embedded[i], &embedded[j]));

    let eig = SymmetricEigen::new(sm.clone());
    let keep: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] >= epsilon).collect();
    if keep.is_empty() {
        return Err(Error::Regularization(format!("every overlap eigenvalue is below {epsilon:e}")));
    }
    let x = DMatrix::from_fn(n, keep.len(), |r, c| eig.eigenvectors[(r, keep[c])] / eig.eigenvalues[keep[c]].sqrt());
    let s_reg = x.transpose() * &sm * &x;
    let s_eig = SymmetricEigen::new(s_reg).eigenvalues;
    let kappa = s_eig.max() / s_eig.min();
    if (kappa - 1.0).abs() >= KAPPA_TOL {
        return Err(Error::Regularization(format!("regularized overlap has condition number {kappa}")));
    }
    let h_red = x.transpose() * &hm * &x;
    let (eigenvalue, y) = dense_lowest(&h_red);
    let a = &x * nalgebra::DVector::from_vec(y);
    let mut coeffs = vec![0.0; union.len()];
    for (mu, v) in embedded.iter().enumerate() {
        for (c, vi) in coeffs.iter_mut().zip(v) {
            *c += a[mu] * vi;
        }
    }
    fix_sign(&mut coeffs);
    Ok(GevOutcome {
        wavefunction: SubspaceWavefunction::new(union, coeffs)?,
        eigenvalue,
        kept: keep.len(),
        truncated: n - keep.len(),
    })
}

/// Combines each fraction's states, then fits `E` against `V` across
/// fractions. Falls back to the lowest energy when fewer than two fractions
/// are given, any combined variance is below [`ZERO_VARIANCE`], or the slope
/// is negative.
pub fn gev_extrapolate(
    groups: &[(f64, Vec<SubspaceWavefunction>)],
    ints: &IntegralSet,
    epsilon: f64,
) -> Result<ExtrapolationResult> {
    let combined: Vec<(EnergyVariancePoint, GevOutcome)> = groups
        .par_iter()
        .map(|(zeta, states)| {
            let outcome = gev_combine(states, ints, epsilon)?;
            let point = energy_and_variance(&outcome.wavefunction, ints).labelled(*zeta, 0);
            Ok((point, outcome))
        })
        .collect::<Result<_>>()?;
    let points: Vec<EnergyVariancePoint> = combined.iter().map(|c| c.0).collect();
    let kept = combined.iter().map(|c| c.1.kept).collect();
    let truncated = combined.iter().map(|c| c.1.truncated).collect();
    let mut r = fit_or_fallback(points)?;
    r.diagnostics.kept = kept;
    r.diagnostics.truncated = truncated;
    Ok(r)
}

/// The GEV decision rule applied to one point per fraction.
pub fn fit_or_fallback(points: Vec<EnergyVariancePoint>) -> Result<ExtrapolationResult> {
    if points.len() < 2 {
        return Ok(ExtrapolationResult::fallback(points, "fewer than two subspace fractions"));
    }
    if let Some(p) = points.iter().find(|p| p.variance < ZERO_VARIANCE) {
        let reason = format!("variance {:.3e} at zeta = {} is below {ZERO_VARIANCE:e}", p.variance, p.zeta);
        return Ok(ExtrapolationResult::fallback(points, reason));
    }
    let fit = ols_fit(&as_pairs(&points))?;
    if fit.slope < 0.0 {
        let reason = format!("negative slope {:.6e}", fit.slope);
        let mut r = ExtrapolationResult::fallback(points, reason);
        r.diagnostics.fit = Some(fit);
        return Ok(r);
    }
    Ok(ExtrapolationResult {
        estimate: fit.intercept,
        ci: fit.ci(),
        method: Method::Gev,
        diagnostics: Diagnostics { points, fit: Some(fit), ..Default::default() },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::determinant::tests::random_integrals;
    use crate::subspace::{ground_state, SolverOptions};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn full_eigen(ints: &IntegralSet) -> (DeterminantBasis, Vec<f64>, DMatrix<f64>) {
        let basis = DeterminantBasis::full(ints.norb(), ints.n_alpha(), ints.n_beta()).unwrap();
        let dense = project_hamiltonian(&basis, ints).to_dense();
        let eig = SymmetricEigen::new(dense);
        let mut order: Vec<usize> = (0..basis.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = DMatrix::from_fn(basis.len(), basis.len(), |r, c| eig.eigenvectors[(r, order[c])]);
        (basis, values, vectors)
    }

    #[test]
    fn single_state_is_returned() {
        let ints = random_integrals(3, 1, 1, 3);
        let basis = DeterminantBasis::full(3, 1, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let psi =
            SubspaceWavefunction::new(basis.clone(), (0..9).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
        let out = gev_combine(std::slice::from_ref(&psi), &ints, DEFAULT_EPSILON).unwrap();
        let rq = energy_and_variance(&psi, &ints).energy;
        assert!((out.eigenvalue - rq).abs() < 1e-12);
        let sign = if out.wavefunction.coeffs()[0] * psi.coeffs()[0] < 0.0 { -1.0 } else { 1.0 };
        for (a, b) in out.wavefunction.coeffs().iter().zip(psi.coeffs()) {
            assert!((a - sign * b).abs() < 1e-12);
        }
    }

    #[test]
    fn duplicate_states_truncate_one_direction() {
        let ints = random_integrals(3, 1, 1, 4);
        let basis = DeterminantBasis::full(3, 1, 1).unwrap();
        let h = project_hamiltonian(&basis, &ints);
        let (_, mut psi) = ground_state(&h, &basis, &SolverOptions::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        psi = SubspaceWavefunction::new(
            basis,
            psi.coeffs().iter().map(|c| c + 0.1 * rng.random_range(-1.0..1.0)).collect(),
        )
        .unwrap();
        let out = gev_combine(&[psi.clone(), psi.clone()], &ints, DEFAULT_EPSILON).unwrap();
        assert_eq!((out.kept, out.truncated), (1, 1));
        for (a, b) in out.wavefunction.coeffs().iter().zip(psi.coeffs()) {
            assert!((a.abs() - b.abs()).abs() < 1e-10);
        }
    }

    #[test]
    fn orthogonal_eigenvectors_pick_the_lower() {
        let ints = random_integrals(3, 1, 1, 6);
        let (basis, values, vectors) = full_eigen(&ints);
        let v =
            |k: usize| SubspaceWavefunction::new(basis.clone(), vectors.column(k).iter().copied().collect()).unwrap();
        let out = gev_combine(&[v(2), v(0)], &ints, DEFAULT_EPSILON).unwrap();
        assert!((out.eigenvalue - values[0]).abs() < 1e-10);
        let overlap: f64 = out.wavefunction.coeffs().iter().zip(vectors.column(0).iter()).map(|(a, b)| a * b).sum();
        assert!((overlap.abs() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn subspace_states_on_different_bases() {
        let ints = random_integrals(4, 2, 2, 8);
        let full = DeterminantBasis::full(4, 2, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut states = Vec::new();
        for _ in 0..4 {
            let dets: Vec<_> = full.dets().iter().copied().filter(|_| rng.random_bool(0.5)).collect();
            let basis = DeterminantBasis::new(dets, 4, 2, 2).unwrap();
            let h = project_hamiltonian(&basis, &ints);
            states.push(ground_state(&h, &basis, &SolverOptions::default()).unwrap().1);
        }
        let best = states.iter().map(|s| energy_and_variance(s, &ints).energy).fold(f64::INFINITY, f64::min);
        let out = gev_combine(&states, &ints, DEFAULT_EPSILON).unwrap();
        assert!(out.eigenvalue <= best + 1e-10);
        let ev = energy_and_variance(&out.wavefunction, &ints);
        assert!((ev.energy - out.eigenvalue).abs() < 1e-10);
    }

    #[test]
    fn all_directions_truncated() {
        let ints = random_integrals(2, 1, 1, 1);
        let basis = DeterminantBasis::full(2, 1, 1).unwrap();
        let psi = SubspaceWavefunction::new(basis, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(matches!(gev_combine(&[psi], &ints, 2.0), Err(Error::Regularization(_))));
        assert!(gev_combine(&[], &ints, DEFAULT_EPSILON).is_err());
    }

    #[test]
    fn eigenstate_triggers_fallback() {
        let ints = random_integrals(3, 1, 1, 9);
        let (basis, values, vectors) = full_eigen(&ints);
        let g = SubspaceWavefunction::new(basis, vectors.column(0).iter().copied().collect()).unwrap();
        let r = gev_extrapolate(&[(1.0, vec![g])], &ints, DEFAULT_EPSILON).unwrap();
        assert_eq!(r.method, Method::MinFallback);
        assert!(r.ci.is_none());
        assert!((r.estimate - values[0]).abs() < 1e-10);
    }

    #[test]
    fn negative_slope_falls_back() {
        let pts: Vec<EnergyVariancePoint> = (0..5)
            .map(|i| {
                let v = 0.01 * (i + 1) as f64;
                EnergyVariancePoint { energy: -1.0 - 3.0 * v, variance: v, zeta: i as f64, batch: 0 }
            })
            .collect();
        let r = fit_or_fallback(pts).unwrap();
        assert_eq!(r.method, Method::MinFallback);
        assert!((r.estimate - (-1.15)).abs() < 1e-12);
        assert!(r.diagnostics.fit.unwrap().slope < 0.0);
    }

    #[test]
    fn converging_ladder_brackets_the_ground_energy() {
        let ints = random_integrals(4, 2, 2, 17);
        let (basis, values, vectors) = full_eigen(&ints);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let groups: Vec<(f64, Vec<SubspaceWavefunction>)> = [0.25, 0.5, 1.0, 2.0, 4.0]
            .iter()
            .enumerate()
            .map(|(z, &zeta)| {
                let eps = 0.2 / (1.5f64).powi(z as i32);
                let states = (0..3)
                    .map(|_| {
                        let c: Vec<f64> =
                            vectors.column(0).iter().map(|g| g + eps * rng.random_range(-1.0..1.0)).collect();
                        SubspaceWavefunction::new(basis.clone(), c).unwrap()
                    })
                    .collect();
                (zeta, states)
            })
            .collect();
        let r = gev_extrapolate(&groups, &ints, DEFAULT_EPSILON).unwrap();
        assert_eq!(r.method, Method::Gev, "{:?}", r.diagnostics.fallback_reason);
        let (lo, hi) = r.ci.unwrap();
        assert!(lo <= r.estimate && r.estimate <= hi);
        assert!((r.estimate - values[0]).abs() < 0.05);
        assert_eq!(r.diagnostics.points.len(), 5);
    }
}
