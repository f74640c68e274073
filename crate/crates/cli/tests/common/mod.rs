#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sqdforge::lucj::Amplitudes;
use sqdforge::{write_fcidump, IntegralSet};

#[path = "../../../core/src/oracle.rs"]
pub mod oracle;

pub struct SpeciesSpec {
    pub id: &'static str,
    pub norb: usize,
    pub n_alpha: usize,
    pub n_beta: usize,
    pub seed: u64,
    pub reference: Vec<(&'static str, f64)>,
}

impl SpeciesSpec {
    pub fn new(id: &'static str, norb: usize, n_alpha: usize, n_beta: usize, seed: u64) -> Self {
        Self { id, norb, n_alpha, n_beta, seed, reference: Vec::new() }
    }
}

/// Symmetric random integrals with a dominant diagonal so that the
/// Hartree-Fock determinant is the leading configuration.
pub fn random_integrals(norb: usize, na: usize, nb: usize, seed: u64) -> IntegralSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ints = IntegralSet::zeros(norb, na, nb).unwrap();
    ints.set_e_core(rng.random_range(0.5..1.5));
    for p in 0..norb {
        for r in 0..=p {
            let v = if p == r { -2.0 + 0.8 * p as f64 } else { rng.random_range(-0.1..0.1) };
            ints.set_one_electron(p, r, v).unwrap();
        }
    }
    for (p, r, q, s, _) in ints.clone().canonical_two_electron() {
        let v = if p == r && q == s { rng.random_range(0.4..0.7) } else { rng.random_range(-0.05..0.05) };
        ints.set_two_electron(p, r, q, s, v).unwrap();
    }
    ints
}

pub fn random_amplitudes(norb: usize, na: usize, nb: usize, seed: u64) -> Amplitudes {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xa5a5);
    let mut amps = Amplitudes::zeros(norb, na, nb).unwrap();
    let (no, nv) = (amps.n_occ, amps.n_vir);
    for i in 0..no {
        for j in 0..no {
            for a in 0..nv {
                for b in 0..nv {
                    if (i, a) <= (j, b) {
                        let v = rng.random_range(-0.3..0.3);
                        amps.set_t2(i, j, a, b, v).unwrap();
                        amps.set_t2(j, i, b, a, v).unwrap();
                    }
                }
            }
        }
    }
    amps
}

/// Lowest sector eigenvalue of the dense Fock-space Hamiltonian.
pub fn dense_fci(ints: &IntegralSet) -> f64 {
    let m = ints.norb();
    let h = oracle::fock_hamiltonian(m, ints.e_core(), &|p, r| ints.one_electron(p, r), &|p, r, q, s| {
        ints.two_electron(p, r, q, s)
    });
    oracle::sector_ground_energy(&h, &oracle::sector_states(m, ints.n_alpha(), ints.n_beta()))
}

/// Hartree-Fock energy as a diagonal element of the dense Fock-space matrix.
pub fn dense_hf(ints: &IntegralSet) -> f64 {
    let m = ints.norb();
    let h = oracle::fock_hamiltonian(m, ints.e_core(), &|p, r| ints.one_electron(p, r), &|p, r, q, s| {
        ints.two_electron(p, r, q, s)
    });
    let low = |n: usize| (1u64 << n) - 1;
    let idx = oracle::join(m, low(ints.n_alpha()), low(ints.n_beta()));
    h[(idx, idx)]
}

pub struct Fixture {
    pub dir: tempfile::TempDir,
    pub manifest: PathBuf,
    pub integrals: BTreeMap<&'static str, IntegralSet>,
}

impl Fixture {
    /// Writes integrals, amplitudes and a manifest; `extra` is appended to the
    /// manifest's global section.
    pub fn new(species: &[SpeciesSpec], extra: &str) -> Self {
        let dir = tempfile::tempdir().unwrap();
        let mut toml = format!("{extra}\n");
        let mut integrals = BTreeMap::new();
        for s in species {
            let ints = random_integrals(s.norb, s.n_alpha, s.n_beta, s.seed);
            let amps = random_amplitudes(s.norb, s.n_alpha, s.n_beta, s.seed);
            fs::write(dir.path().join(format!("{}.fcidump", s.id)), write_fcidump(&ints)).unwrap();
            fs::write(dir.path().join(format!("{}.amp", s.id)), amps.to_text()).unwrap();
            toml.push_str(&format!(
                "\n[[species]]\nid = \"{0}\"\nfcidump = \"{0}.fcidump\"\namplitudes = \"{0}.amp\"\n\
                 n_alpha = {1}\nn_beta = {2}\nnorb = {3}\n",
                s.id, s.n_alpha, s.n_beta, s.norb
            ));
            if !s.reference.is_empty() {
                toml.push_str("[species.reference]\n");
                for (k, v) in &s.reference {
                    toml.push_str(&format!("{k} = {v:?}\n"));
                }
            }
            integrals.insert(s.id, ints);
        }
        let manifest = dir.path().join("run.toml");
        fs::write(&manifest, toml).unwrap();
        Self { dir, manifest, integrals }
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.dir.path().join(rel)
    }

    pub fn species_file(&self, id: &str, name: &str) -> PathBuf {
        self.dir.path().join("work").join(id).join(name)
    }

    pub fn run(&self, args: &[&str]) -> Output {
        let mut full: Vec<String> = Vec::new();
        let mut it = args.iter();
        if let Some(cmd) = it.next() {
            full.push(cmd.to_string());
            full.push(self.manifest.display().to_string());
        }
        full.extend(it.map(|s| s.to_string()));
        Command::new(env!("CARGO_BIN_EXE_sqdforge")).args(&full).output().unwrap()
    }

    pub fn run_ok(&self, args: &[&str]) -> Output {
        let out = self.run(args);
        assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
        out
    }
}

/// Every file under `root` with its bytes, keyed by relative path.
pub fn snapshot(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(root).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    out
}

pub fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}
