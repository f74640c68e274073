//! Self-consistent configuration recovery and batched subspace
//! diagonalization.
//!
//! Iteration 0 keeps only samples with the right electron counts and solves
//! one batch. Every later iteration repairs the violators with flip weights
//! `|x_p - n_p|` taken from the previous occupations, pools them with the
//! valid samples, draws `K` batches of at most `d` configurations and solves
//! each one. The Hartree-Fock determinant is forced into every batch.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::determinant::{bits, low_mask, Determinant};
use crate::error::{Error, Result};
use crate::integrals::IntegralSet;
use crate::lucj::SampleSet;
use crate::rng::stream;
use crate::subspace::{
    build_basis, energy_and_variance, ground_state, project_hamiltonian, BasisMode, EnergyVariancePoint, SolverOptions,
    SubspaceWavefunction,
};

const RECOVERY_STREAM: u64 = 0x7265_636f;
const BATCH_STREAM: u64 = 0x6261_7463;

/// Controls for [`run_sqd`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqdPlan {
    /// Configurations per batch.
    pub d: usize,
    /// Batches per iteration after the first.
    pub k: usize,
    /// Total iterations, iteration 0 included.
    pub max_iter: usize,
    pub energy_tol: f64,
    /// Subspace-fraction label attached to every point.
    pub zeta: f64,
    pub seed: u64,
    pub mode: BasisMode,
    pub solver: SolverOptions,
}

impl SqdPlan {
    pub fn new(d: usize, k: usize, zeta: f64, seed: u64) -> Self {
        Self { d, k, zeta, seed, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        if self.d == 0 || self.k == 0 || self.max_iter == 0 {
            return Err(Error::Consistency(format!(
                "plan needs d, K, max_iter >= 1 (got {}, {}, {})",
                self.d, self.k, self.max_iter
            )));
        }
        Ok(())
    }
}

impl Default for SqdPlan {
    fn default() -> Self {
        Self {
            d: 1,
            k: 1,
            max_iter: 5,
            energy_tol: 1e-6,
            zeta: 1.0,
            seed: 0,
            mode: BasisMode::Product,
            solver: SolverOptions::default(),
        }
    }
}

/// Outcome of one iteration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub index: usize,
    /// One point per batch, in batch order.
    pub points: Vec<EnergyVariancePoint>,
    /// Distinct configurations drawn into each batch (HF included).
    pub batch_configs: Vec<usize>,
    /// Dimension of each batch subspace.
    pub basis_dims: Vec<usize>,
    /// Violating configurations repaired before this iteration.
    pub recovered: usize,
    /// Mean occupations over this iteration's batches, alpha then beta.
    pub occupations: Vec<f64>,
    pub min_energy: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SqdResult {
    pub plan: SqdPlan,
    pub norb: usize,
    pub n_alpha: usize,
    pub n_beta: usize,
    pub iterations: Vec<IterationRecord>,
    /// Running minimum of the batch energies, per iteration.
    pub energy_history: Vec<f64>,
    /// Minimum over all batches and iterations.
    pub energy: f64,
    pub converged: bool,
    /// Batch wavefunctions of the last iteration.
    #[serde(skip)]
    pub wavefunctions: Vec<SubspaceWavefunction>,
}

impl SqdResult {
    /// Points of the last iteration, the ones used for extrapolation.
    pub fn final_points(&self) -> &[EnergyVariancePoint] {
        self.iterations.last().map(|it| it.points.as_slice()).unwrap_or(&[])
    }

    pub fn final_occupations(&self) -> &[f64] {
        self.iterations.last().map(|it| it.occupations.as_slice()).unwrap_or(&[])
    }
}

/// Repairs one spin string in place until it holds `target` electrons.
fn recover_string(mask: &mut u64, occ: &[f64], norb: usize, target: usize, rng: &mut impl Rng) {
    let full = low_mask(norb);
    while (mask.count_ones() as usize) != target {
        let over = mask.count_ones() as usize > target;
        let (candidates, x) = if over { (*mask, 1.0) } else { (full & !*mask, 0.0) };
        let cands: Vec<usize> = bits(candidates).collect();
        let weights: Vec<f64> = cands.iter().map(|&p| (x - occ[p]).abs()).collect();
        let total: f64 = weights.iter().sum();
        let pick = if total > 0.0 && total.is_finite() {
            let mut u = rng.random::<f64>() * total;
            let mut chosen = cands[cands.len() - 1];
            for (&p, &w) in cands.iter().zip(&weights) {
                if u < w {
                    chosen = p;
                    break;
                }
                u -= w;
            }
            chosen
        } else {
            log::debug!("all flip weights vanish; choosing uniformly among {} orbitals", cands.len());
            cands[rng.random_range(0..cands.len())]
        };
        *mask ^= 1 << pick;
    }
}

/// Flips bits of `x` until it has `targets = (n_alpha, n_beta)` electrons.
/// `occ` holds the alpha occupations followed by the beta ones.
pub fn recover_bitstring(
    x: &Determinant,
    occ: &[f64],
    norb: usize,
    targets: (usize, usize),
    rng: &mut impl Rng,
) -> Result<Determinant> {
    if occ.len() != 2 * norb {
        return Err(Error::Shape(format!("{} occupations for {norb} orbitals", occ.len())));
    }
    if !x.fits(norb) || targets.0 > norb || targets.1 > norb {
        return Err(Error::Configuration(format!("bitstring or targets inconsistent with M = {norb}")));
    }
    let mut d = *x;
    recover_string(&mut d.alpha, &occ[..norb], norb, targets.0, rng);
    recover_string(&mut d.beta, &occ[norb..], norb, targets.1, rng);
    Ok(d)
}

/// Valid samples plus repaired violators, multiplicities preserved.
fn recovered_pool(
    samples: &SampleSet,
    occ: &[f64],
    targets: (usize, usize),
    rng: &mut impl Rng,
) -> Result<(BTreeMap<Determinant, u64>, usize)> {
    let mut pool = BTreeMap::new();
    let mut repaired = 0;
    for (d, &c) in samples.iter() {
        let fixed = if d.n_alpha() == targets.0 && d.n_beta() == targets.1 {
            *d
        } else {
            repaired += 1;
            recover_bitstring(d, occ, samples.norb, targets, rng)?
        };
        *pool.entry(fixed).or_insert(0) += c;
    }
    Ok((pool, repaired))
}

/// Multiplicity-weighted draw of at most `d` distinct configurations without
/// replacement (Efraimidis-Spirakis keys), with `hf` forced in.
pub fn draw_batch(
    pool: &BTreeMap<Determinant, u64>,
    d: usize,
    hf: Determinant,
    rng: &mut impl Rng,
) -> Vec<Determinant> {
    let mut keyed: Vec<(f64, Determinant)> = pool
        .iter()
        .map(|(det, &w)| {
            let u: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
            (u.ln() / w as f64, *det)
        })
        .collect();
    keyed.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut batch: Vec<Determinant> = keyed.into_iter().take(d).map(|(_, det)| det).collect();
    if !batch.contains(&hf) {
        if batch.len() == d {
            batch.pop();
        }
        batch.push(hf);
    }
    batch.sort();
    batch
}

struct BatchOutcome {
    point: EnergyVariancePoint,
    wavefunction: SubspaceWavefunction,
    configs: usize,
}

fn solve_batch(configs: &[Determinant], ints: &IntegralSet, plan: &SqdPlan, batch: usize) -> Result<BatchOutcome> {
    let run = || -> Result<BatchOutcome> {
        let basis = build_basis(configs, plan.mode, ints.norb(), ints.n_alpha(), ints.n_beta())?;
        let h = project_hamiltonian(&basis, ints);
        let (_, wavefunction) = ground_state(&h, &basis, &plan.solver)?;
        let point = energy_and_variance(&wavefunction, ints).labelled(plan.zeta, batch);
        Ok(BatchOutcome { point, wavefunction, configs: configs.len() })
    };
    run().map_err(|e| Error::Batch { batch, source: Box::new(e) })
}

fn mean_occupations(outcomes: &[BatchOutcome], norb: usize) -> Vec<f64> {
    let mut occ = vec![0.0; 2 * norb];
    for o in outcomes {
        for (acc, n) in occ.iter_mut().zip(o.wavefunction.occupations()) {
            *acc += n;
        }
    }
    occ.iter_mut().for_each(|n| *n /= outcomes.len() as f64);
    occ
}

/// Runs configuration recovery and batched diagonalization over `samples`.
pub fn run_sqd(samples: &SampleSet, ints: &IntegralSet, plan: &SqdPlan) -> Result<SqdResult> {
    plan.validate()?;
    let (m, na, nb) = (ints.norb(), ints.n_alpha(), ints.n_beta());
    if samples.norb != m {
        return Err(Error::Shape(format!("samples span {} orbitals, integrals {m}", samples.norb)));
    }
    if samples.is_empty() {
        return Err(Error::Recovery("sample set is empty".into()));
    }
    let hf = Determinant::hartree_fock(na, nb);

    let mut iterations: Vec<IterationRecord> = Vec::new();
    let mut energy_history: Vec<f64> = Vec::new();
    let mut wavefunctions = Vec::new();
    let mut converged = false;

    for iter in 0..plan.max_iter {
        let (batches, recovered) = if iter == 0 {
            let valid: BTreeMap<Determinant, u64> =
                samples.iter().filter(|(d, _)| d.n_alpha() == na && d.n_beta() == nb).map(|(d, &c)| (*d, c)).collect();
            if valid.is_empty() {
                log::warn!("no sample has the target electron counts; iteration 0 uses Hartree-Fock only");
            }
            let mut rng = stream(plan.seed, &[BATCH_STREAM, 0, 0]);
            (vec![draw_batch(&valid, plan.d, hf, &mut rng)], 0)
        } else {
            let occ = &iterations[iter - 1].occupations;
            let mut rng = stream(plan.seed, &[RECOVERY_STREAM, iter as u64]);
            let (pool, repaired) = recovered_pool(samples, occ, (na, nb), &mut rng)?;
            if pool.is_empty() {
                return Err(Error::Recovery("no valid configurations after recovery".into()));
            }
            let batches = (0..plan.k)
                .map(|k| {
                    let mut rng = stream(plan.seed, &[BATCH_STREAM, iter as u64, k as u64]);
                    draw_batch(&pool, plan.d, hf, &mut rng)
                })
                .collect();
            (batches, repaired)
        };

        let outcomes: Vec<BatchOutcome> = batches
            .par_iter()
            .enumerate()
            .map(|(k, configs)| solve_batch(configs, ints, plan, k))
            .collect::<Result<_>>()?;

        let min_energy = outcomes.iter().map(|o| o.point.energy).fold(f64::INFINITY, f64::min);
        let occupations = mean_occupations(&outcomes, m);
        let best = energy_history.last().map_or(min_energy, |&prev: &f64| prev.min(min_energy));
        let improvement = energy_history.last().map(|&prev| prev - best);
        energy_history.push(best);
        iterations.push(IterationRecord {
            index: iter,
            points: outcomes.iter().map(|o| o.point).collect(),
            batch_configs: outcomes.iter().map(|o| o.configs).collect(),
            basis_dims: outcomes.iter().map(|o| o.wavefunction.len()).collect(),
            recovered,
            occupations,
            min_energy,
        });
        wavefunctions = outcomes.into_iter().map(|o| o.wavefunction).collect();
        log::info!("sqd iteration {iter}: min batch energy {min_energy:.10}, best {best:.10}");

        if improvement.is_some_and(|delta| delta < plan.energy_tol) {
            converged = true;
            break;
        }
    }

    Ok(SqdResult {
        plan: *plan,
        norb: m,
        n_alpha: na,
        n_beta: nb,
        energy: *energy_history.last().expect("at least one iteration"),
        iterations,
        energy_history,
        converged,
        wavefunctions,
    })
}
