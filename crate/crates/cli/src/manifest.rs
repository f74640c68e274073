//! Run manifest: species records plus global sampling and solver settings.
//!
//! Relative paths resolve against the manifest's directory.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::Deserialize;
use sqdforge::benchstats::DEFAULT_ZETAS;

use crate::error::CliError;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSettings {
    #[serde(default)]
    pub p_flip: f64,
    #[serde(default)]
    pub p_depol: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Species {
    pub id: String,
    pub fcidump: PathBuf,
    pub amplitudes: PathBuf,
    pub n_alpha: usize,
    pub n_beta: usize,
    pub norb: usize,
    /// Clusters for LMM extrapolation.
    #[serde(default = "one")]
    pub clusters: usize,
    /// Reference total energies by method, in hartree.
    #[serde(default)]
    pub reference: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(default = "default_zetas")]
    pub zetas: Vec<f64>,
    /// Batches per recovery iteration.
    #[serde(default = "default_batches")]
    pub batches: usize,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_shots")]
    pub shots: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_noise")]
    pub noise: NoiseSettings,
    pub reactions: Option<PathBuf>,
    /// Extra energies CSV merged into the report table.
    pub energies: Option<PathBuf>,
    #[serde(default = "default_work_dir")]
    pub work_dir: PathBuf,
    pub species: Vec<Species>,
}

fn one() -> usize {
    1
}

fn default_zetas() -> Vec<f64> {
    DEFAULT_ZETAS.to_vec()
}

fn default_batches() -> usize {
    10
}

fn default_max_iter() -> usize {
    5
}

fn default_shots() -> u64 {
    1_000_000
}

fn default_noise() -> NoiseSettings {
    NoiseSettings { p_flip: 0.0, p_depol: 0.0 }
}

fn default_work_dir() -> PathBuf {
    PathBuf::from("work")
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut m: Manifest = toml::from_str(&text).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &PathBuf| if p.is_absolute() { p.clone() } else { base.join(p) };
        m.work_dir = resolve(&m.work_dir);
        m.reactions = m.reactions.as_ref().map(resolve);
        m.energies = m.energies.as_ref().map(resolve);
        for s in &mut m.species {
            s.fcidump = resolve(&s.fcidump);
            s.amplitudes = resolve(&s.amplitudes);
        }
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<(), CliError> {
        let mut seen = BTreeSet::new();
        for s in &self.species {
            if !seen.insert(s.id.as_str()) {
                return Err(CliError::data(format!("species id `{}` appears twice", s.id)));
            }
            for p in [&s.fcidump, &s.amplitudes] {
                if !p.is_file() {
                    return Err(CliError::data(format!("species `{}`: {} does not exist", s.id, p.display())));
                }
            }
            if s.n_alpha > s.norb || s.n_beta > s.norb {
                return Err(CliError::data(format!("species `{}`: more electrons than orbitals", s.id)));
            }
        }
        for p in self.reactions.iter().chain(&self.energies) {
            if !p.is_file() {
                return Err(CliError::data(format!("{} does not exist", p.display())));
            }
        }
        if self.zetas.is_empty() || self.zetas.iter().any(|z| !(z.is_finite() && *z > 0.0)) {
            return Err(CliError::data("zetas must be a non-empty list of positive numbers"));
        }
        Ok(())
    }

    /// Species matching `ids`, or all of them when `ids` is empty.
    pub fn select(&self, ids: &[String]) -> Result<Vec<&Species>, CliError> {
        if ids.is_empty() {
            return Ok(self.species.iter().collect());
        }
        ids.iter()
            .map(|id| {
                self.species
                    .iter()
                    .find(|s| &s.id == id)
                    .ok_or_else(|| CliError::usage(format!("no species `{id}` in the manifest")))
            })
            .collect()
    }

    pub fn species_dir(&self, s: &Species) -> PathBuf {
        self.work_dir.join(&s.id)
    }
}
