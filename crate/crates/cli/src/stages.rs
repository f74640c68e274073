//! Per-species pipeline stages. Each stage reads the files written by the
//! previous one from the species work directory and writes its own.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{de::DeserializeOwned, Deserialize, Serialize};
use sqdforge::benchstats::{ccsd_param_count, sample_diagnostics, sector_dimension, subspace_plan, SampleDiagnostics};
use sqdforge::extrapolate::{gev_extrapolate, lmm_fit, ols_extrapolate, ExtrapolationResult};
use sqdforge::lucj::{build_lucj_params, estimate_resources, sample_bitstrings, simulate_lucj_state, Amplitudes};
use sqdforge::rng::{derive_seed, label_tag};
use sqdforge::{parse_fcidump, run_sqd, Determinant, IntegralSet, NoiseModel, ResourceEstimate, SampleSet, SqdPlan};
use sqdforge::{SqdResult, SubspaceWavefunction};

use crate::error::CliError;
use crate::manifest::{Manifest, Species};

pub const SAMPLES: &str = "samples.txt";
pub const SAMPLES_META: &str = "samples.json";
pub const DIAGNOSTICS: &str = "diagnostics.json";

pub fn solve_file(i: usize) -> String {
    format!("sqd_z{i}.json")
}

pub fn extrap_file(method: &str) -> String {
    format!("extrap_{method}.json")
}

pub fn stage_seed(seed: u64, stage: &str, species: &str) -> u64 {
    derive_seed(seed, &[label_tag(stage), label_tag(species)])
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    serde_json::from_str(&read_text(path)?).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

fn load_integrals(s: &Species) -> Result<IntegralSet, CliError> {
    let ints = parse_fcidump(&read_text(&s.fcidump)?).map_err(|e| CliError::from(e).context(s.fcidump.display()))?;
    if (ints.norb(), ints.n_alpha(), ints.n_beta()) != (s.norb, s.n_alpha, s.n_beta) {
        return Err(CliError::data(format!(
            "{}: (M, n_alpha, n_beta) = ({}, {}, {}) but the manifest says ({}, {}, {})",
            s.fcidump.display(),
            ints.norb(),
            ints.n_alpha(),
            ints.n_beta(),
            s.norb,
            s.n_alpha,
            s.n_beta
        )));
    }
    Ok(ints)
}

fn load_samples(dir: &Path) -> Result<SampleSet, CliError> {
    let path = dir.join(SAMPLES);
    if !path.is_file() {
        return Err(CliError::data(format!("{} is missing; run `sqdforge sample` first", path.display())));
    }
    SampleSet::parse(&read_text(&path)?).map_err(|e| CliError::from(e).context(path.display()))
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SampleArgs {
    pub shots: Option<u64>,
    pub p_flip: Option<f64>,
    pub p_depol: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SampleRecord {
    pub species: String,
    pub seed: u64,
    pub shots: u64,
    pub noise: NoiseModel,
    pub diagnostics: SampleDiagnostics,
}

pub fn sample(m: &Manifest, s: &Species, args: SampleArgs) -> Result<SampleRecord, CliError> {
    let dir = m.species_dir(s);
    load_integrals(s)?;
    let amps =
        Amplitudes::parse(&read_text(&s.amplitudes)?).map_err(|e| CliError::from(e).context(s.amplitudes.display()))?;
    if amps.norb != s.norb {
        return Err(CliError::data(format!(
            "{}: amplitudes cover {} orbitals, not {}",
            s.amplitudes.display(),
            amps.norb,
            s.norb
        )));
    }
    let params = build_lucj_params(&amps);
    let state = simulate_lucj_state(&params, &Determinant::hartree_fock(s.n_alpha, s.n_beta))?;
    let noise = NoiseModel::new(args.p_flip.unwrap_or(m.noise.p_flip), args.p_depol.unwrap_or(m.noise.p_depol), 0)?;
    let seed = stage_seed(args.seed.unwrap_or(m.seed), "sample", &s.id);
    let shots = args.shots.unwrap_or(m.shots);
    let samples = sample_bitstrings(&state, shots, &noise, seed);
    write_text(&dir.join(SAMPLES), &samples.to_text())?;
    let record = SampleRecord {
        species: s.id.clone(),
        seed,
        shots,
        noise,
        diagnostics: sample_diagnostics(&samples, s.n_alpha, s.n_beta),
    };
    write_json(&dir.join(SAMPLES_META), &record)?;
    Ok(record)
}

#[derive(Clone, Debug, Default)]
pub struct SolveArgs {
    pub zetas: Vec<f64>,
    pub batches: Option<usize>,
    pub max_iter: Option<usize>,
    pub seed: Option<u64>,
}

/// One `run_sqd` outcome with the batch wavefunctions it stored.
#[derive(Debug, Serialize, Deserialize)]
pub struct SolveRecord {
    pub species: String,
    pub zeta_index: usize,
    pub zeta: f64,
    pub d: usize,
    pub seed: u64,
    /// Paths relative to the species directory.
    pub wavefunctions: Vec<String>,
    pub result: SqdResult,
}

fn clear_solve_outputs(dir: &Path) -> Result<(), CliError> {
    let wfn = dir.join("wfn");
    if wfn.is_dir() {
        fs::remove_dir_all(&wfn).map_err(|e| CliError::io(&wfn, e))?;
    }
    for i in 0.. {
        let p = dir.join(solve_file(i));
        if !p.is_file() {
            break;
        }
        fs::remove_file(&p).map_err(|e| CliError::io(&p, e))?;
    }
    Ok(())
}

pub fn solve(m: &Manifest, s: &Species, args: &SolveArgs) -> Result<Vec<SolveRecord>, CliError> {
    let dir = m.species_dir(s);
    let ints = load_integrals(s)?;
    let samples = load_samples(&dir)?;
    if samples.norb != s.norb {
        return Err(CliError::data(format!("samples cover {} orbitals, not {}", samples.norb, s.norb)));
    }
    let zetas = if args.zetas.is_empty() { m.zetas.clone() } else { args.zetas.clone() };
    let n_ccsd = ccsd_param_count(s.n_alpha, s.n_beta, s.norb);
    let dims = subspace_plan(n_ccsd, &zetas, Some(sector_dimension(s.norb, s.n_alpha, s.n_beta)));
    let base = stage_seed(args.seed.unwrap_or(m.seed), "solve", &s.id);
    clear_solve_outputs(&dir)?;

    let mut records = Vec::new();
    for (i, (&zeta, &d)) in zetas.iter().zip(&dims).enumerate() {
        let seed = derive_seed(base, &[i as u64]);
        let mut plan = SqdPlan::new(d, args.batches.unwrap_or(m.batches), zeta, seed);
        plan.max_iter = args.max_iter.unwrap_or(m.max_iter);
        let result =
            run_sqd(&samples, &ints, &plan).map_err(|e| CliError::from(e).context(format!("zeta = {zeta}")))?;
        let mut wavefunctions = Vec::new();
        for (k, psi) in result.wavefunctions.iter().enumerate() {
            let rel = format!("wfn/z{i}_k{k}.wfn");
            write_text(&dir.join(&rel), &psi.to_text())?;
            wavefunctions.push(rel);
        }
        let record = SolveRecord { species: s.id.clone(), zeta_index: i, zeta, d, seed, wavefunctions, result };
        write_json(&dir.join(solve_file(i)), &record)?;
        records.push(record);
    }
    Ok(records)
}

/// Solve records in zeta order; empty when `solve` has not run.
pub fn load_solve_records(dir: &Path) -> Result<Vec<SolveRecord>, CliError> {
    let mut out = Vec::new();
    for i in 0.. {
        let p = dir.join(solve_file(i));
        if !p.is_file() {
            break;
        }
        out.push(read_json(&p)?);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtrapMethod {
    Gev,
    Lmm,
    Ols,
}

impl ExtrapMethod {
    pub const ALL: [ExtrapMethod; 3] = [ExtrapMethod::Gev, ExtrapMethod::Lmm, ExtrapMethod::Ols];

    pub fn as_str(&self) -> &'static str {
        match self {
            ExtrapMethod::Gev => "gev",
            ExtrapMethod::Lmm => "lmm",
            ExtrapMethod::Ols => "ols",
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ExtrapArgs {
    pub method: ExtrapMethod,
    pub clusters: Option<usize>,
    pub epsilon: f64,
    pub seed: Option<u64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ExtrapRecord {
    pub species: String,
    pub method: ExtrapMethod,
    pub seed: u64,
    pub clusters: Option<usize>,
    pub epsilon: Option<f64>,
    pub result: ExtrapolationResult,
}

fn load_wavefunction(dir: &Path, rel: &str) -> Result<SubspaceWavefunction, CliError> {
    let path: PathBuf = dir.join(rel);
    let text = fs::read_to_string(&path).map_err(|e| {
        CliError::data(format!(
            "wavefunction store {} unreadable ({e}); re-run `sqdforge solve` to regenerate it",
            path.display()
        ))
    })?;
    SubspaceWavefunction::from_text(&text).map_err(|e| CliError::from(e).context(path.display()))
}

pub fn extrapolate(m: &Manifest, s: &Species, args: ExtrapArgs) -> Result<ExtrapRecord, CliError> {
    let dir = m.species_dir(s);
    let records = load_solve_records(&dir)?;
    if records.is_empty() {
        return Err(CliError::data(format!("no solve results in {}; run `sqdforge solve` first", dir.display())));
    }
    let seed = stage_seed(args.seed.unwrap_or(m.seed), "extrapolate", &s.id);
    let points: Vec<_> = records.iter().flat_map(|r| r.result.final_points().iter().copied()).collect();
    let (result, clusters, epsilon) = match args.method {
        ExtrapMethod::Ols => (ols_extrapolate(&points)?, None, None),
        ExtrapMethod::Lmm => {
            let k = args.clusters.unwrap_or(s.clusters);
            (lmm_fit(&points, k, seed)?, Some(k), None)
        }
        ExtrapMethod::Gev => {
            let ints = load_integrals(s)?;
            let groups = records
                .iter()
                .map(|r| {
                    let states =
                        r.wavefunctions.iter().map(|w| load_wavefunction(&dir, w)).collect::<Result<Vec<_>, _>>()?;
                    Ok((r.zeta, states))
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            (gev_extrapolate(&groups, &ints, args.epsilon)?, None, Some(args.epsilon))
        }
    };
    let record = ExtrapRecord { species: s.id.clone(), method: args.method, seed, clusters, epsilon, result };
    write_json(&dir.join(extrap_file(args.method.as_str())), &record)?;
    Ok(record)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub species: String,
    pub sector_dimension: u128,
    pub ccsd_parameters: u64,
    pub subspace_dims: Vec<(f64, usize)>,
    pub samples: Option<SampleDiagnostics>,
    pub resources: ResourceEstimate,
}

pub fn diagnostics(m: &Manifest, s: &Species) -> Result<DiagnosticsRecord, CliError> {
    let dir = m.species_dir(s);
    let full = sector_dimension(s.norb, s.n_alpha, s.n_beta);
    let n_ccsd = ccsd_param_count(s.n_alpha, s.n_beta, s.norb);
    let dims = subspace_plan(n_ccsd, &m.zetas, Some(full));
    let samples = if dir.join(SAMPLES).is_file() {
        Some(sample_diagnostics(&load_samples(&dir)?, s.n_alpha, s.n_beta))
    } else {
        None
    };
    let record = DiagnosticsRecord {
        species: s.id.clone(),
        sector_dimension: full,
        ccsd_parameters: n_ccsd,
        subspace_dims: m.zetas.iter().copied().zip(dims).collect(),
        samples,
        resources: estimate_resources(s.norb),
    };
    write_json(&dir.join(DIAGNOSTICS), &record)?;
    Ok(record)
}
