use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::SectorState;
use crate::determinant::{low_mask, Determinant};
use crate::error::{Error, Result};
use crate::rng::stream;

const SHOT_BLOCK: usize = 4096;

/// Readout bit flips plus global depolarizing.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub p_flip: f64,
    pub p_depol: f64,
    /// Random-stream id mixed into every shot block seed.
    pub stream: u64,
}

impl NoiseModel {
    pub fn new(p_flip: f64, p_depol: f64, stream: u64) -> Result<Self> {
        for (name, p) in [("p_flip", p_flip), ("p_depol", p_depol)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Consistency(format!("{name} = {p} is not a probability")));
            }
        }
        Ok(Self { p_flip, p_depol, stream })
    }

    pub fn noiseless() -> Self {
        Self::default()
    }
}

/// Observed bitstrings with multiplicities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub norb: usize,
    pub n_shots: u64,
    pub entries: BTreeMap<Determinant, u64>,
}

impl SampleSet {
    pub fn new(norb: usize) -> Self {
        Self { norb, n_shots: 0, entries: BTreeMap::new() }
    }

    pub fn from_counts(norb: usize, counts: impl IntoIterator<Item = (Determinant, u64)>) -> Result<Self> {
        let mut set = Self::new(norb);
        for (d, c) in counts {
            set.add(d, c)?;
        }
        Ok(set)
    }

    pub fn add(&mut self, d: Determinant, count: u64) -> Result<()> {
        if !d.fits(self.norb) {
            return Err(Error::Configuration(format!("bitstring wider than 2M = {}", 2 * self.norb)));
        }
        if count > 0 {
            *self.entries.entry(d).or_insert(0) += count;
            self.n_shots += count;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Determinant, &u64)> {
        self.entries.iter()
    }

    /// Shots with exactly `(n_alpha, n_beta)` electrons.
    pub fn count_correct(&self, n_alpha: usize, n_beta: usize) -> u64 {
        self.entries.iter().filter(|(d, _)| d.n_alpha() == n_alpha && d.n_beta() == n_beta).map(|(_, &c)| c).sum()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("SHOTS {} M {}\n", self.n_shots, self.norb);
        for (d, c) in &self.entries {
            let _ = writeln!(out, "{} {c}", d.to_bitstring(self.norb));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| Error::parse(1, "empty sample file"))?;
        let tok: Vec<&str> = header.split_whitespace().collect();
        let (shots, norb) = match tok.as_slice() {
            ["SHOTS", n, "M", m] => (
                n.parse::<u64>().map_err(|_| Error::parse(1, "bad shot count"))?,
                m.parse::<usize>().map_err(|_| Error::parse(1, "bad orbital count"))?,
            ),
            _ => return Err(Error::parse(1, "expected `SHOTS n M m`")),
        };
        let mut set = Self::new(norb);
        for (i, line) in lines {
            let mut it = line.split_whitespace();
            let (Some(bits), Some(count), None) = (it.next(), it.next(), it.next()) else {
                return Err(Error::parse(i + 1, "expected `bitstring count`"));
            };
            let (d, width) = Determinant::parse_bitstring(bits).map_err(|_| Error::parse(i + 1, "bad bitstring"))?;
            if width != norb {
                return Err(Error::parse(i + 1, format!("bitstring has {width} orbitals, header says {norb}")));
            }
            let count = count.parse::<u64>().map_err(|_| Error::parse(i + 1, "bad count"))?;
            set.add(d, count)?;
        }
        if set.n_shots != shots {
            return Err(Error::Consistency(format!("counts sum to {}, header says {shots}", set.n_shots)));
        }
        Ok(set)
    }
}

/// Draws `n_shots` bitstrings from `|amplitude|^2`, then applies the noise
/// channels. Each block of shots runs on its own seeded stream, so the result
/// does not depend on the thread count.
pub fn sample_bitstrings(state: &SectorState, n_shots: u64, noise: &NoiseModel, seed: u64) -> SampleSet {
    let m = state.norb;
    let mut cdf: Vec<f64> = Vec::with_capacity(state.amplitudes.len());
    let mut acc = 0.0;
    for a in &state.amplitudes {
        acc += a.norm_sqr();
        cdf.push(acc);
    }
    let total = acc;
    let full = low_mask(m);
    let n_blocks = (n_shots as usize).div_ceil(SHOT_BLOCK);

    let blocks: Vec<BTreeMap<Determinant, u64>> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream(seed, &[noise.stream, b as u64]);
            let shots = SHOT_BLOCK.min(n_shots as usize - b * SHOT_BLOCK);
            let mut counts = BTreeMap::new();
            for _ in 0..shots {
                let u: f64 = rng.random::<f64>() * total;
                let idx = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
                let mut d = state.determinant(idx);
                if noise.p_depol > 0.0 && rng.random::<f64>() < noise.p_depol {
                    d = Determinant::new(rng.random::<u64>() & full, rng.random::<u64>() & full);
                }
                if noise.p_flip > 0.0 {
                    for p in 0..m {
                        if rng.random::<f64>() < noise.p_flip {
                            d.alpha ^= 1 << p;
                        }
                    }
                    for p in 0..m {
                        if rng.random::<f64>() < noise.p_flip {
                            d.beta ^= 1 << p;
                        }
                    }
                }
                *counts.entry(d).or_insert(0u64) += 1;
            }
            counts
        })
        .collect();

    let mut set = SampleSet::new(m);
    for block in blocks {
        for (d, c) in block {
            *set.entries.entry(d).or_insert(0) += c;
            set.n_shots += c;
        }
    }
    set
}
