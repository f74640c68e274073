//! Coupled-cluster amplitude tables and their text format.
//!
//! ```text
//! T2 M n_occ_alpha n_occ_beta
//! i j a b value
//! ...
//! T1 M n_occ_alpha n_occ_beta
//! i a value
//! ```
//!
//! Indices are 0-based; `i, j` run over the doubly occupied orbitals and
//! `a, b` are virtual-relative (orbital `n_occ + a`). The T1 block is optional.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Spatial amplitudes over `n_occ` doubly occupied and `n_vir` remaining
/// orbitals.
#[derive(Clone, Debug, PartialEq)]
pub struct Amplitudes {
    pub norb: usize,
    pub n_occ_alpha: usize,
    pub n_occ_beta: usize,
    pub n_occ: usize,
    pub n_vir: usize,
    t2: Vec<f64>,
    t1: Option<Vec<f64>>,
}

impl Amplitudes {
    pub fn zeros(norb: usize, n_occ_alpha: usize, n_occ_beta: usize) -> Result<Self> {
        if n_occ_alpha > norb || n_occ_beta > norb {
            return Err(Error::Consistency(format!(
                "occupations ({n_occ_alpha}, {n_occ_beta}) exceed {norb} orbitals"
            )));
        }
        let n_occ = n_occ_alpha.min(n_occ_beta);
        let n_vir = norb - n_occ;
        Ok(Self { norb, n_occ_alpha, n_occ_beta, n_occ, n_vir, t2: vec![0.0; (n_occ * n_vir).pow(2)], t1: None })
    }

    #[inline]
    fn t2_index(&self, i: usize, j: usize, a: usize, b: usize) -> usize {
        ((i * self.n_occ + j) * self.n_vir + a) * self.n_vir + b
    }

    pub fn t2(&self, i: usize, j: usize, a: usize, b: usize) -> f64 {
        self.t2[self.t2_index(i, j, a, b)]
    }

    pub fn set_t2(&mut self, i: usize, j: usize, a: usize, b: usize, v: f64) -> Result<()> {
        self.check(i, a)?;
        self.check(j, b)?;
        let k = self.t2_index(i, j, a, b);
        self.t2[k] = v;
        Ok(())
    }

    pub fn t1(&self, i: usize, a: usize) -> Option<f64> {
        self.t1.as_ref().map(|t| t[i * self.n_vir + a])
    }

    pub fn has_t1(&self) -> bool {
        self.t1.is_some()
    }

    pub fn set_t1(&mut self, i: usize, a: usize, v: f64) -> Result<()> {
        self.check(i, a)?;
        let (no, nv) = (self.n_occ, self.n_vir);
        self.t1.get_or_insert_with(|| vec![0.0; no * nv])[i * nv + a] = v;
        Ok(())
    }

    fn check(&self, i: usize, a: usize) -> Result<()> {
        if i >= self.n_occ || a >= self.n_vir {
            return Err(Error::Index(format!("amplitude index (i={i}, a={a}) outside {}x{}", self.n_occ, self.n_vir)));
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.t2.iter().all(|&x| x == 0.0)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("T2 {} {} {}\n", self.norb, self.n_occ_alpha, self.n_occ_beta);
        for i in 0..self.n_occ {
            for j in 0..self.n_occ {
                for a in 0..self.n_vir {
                    for b in 0..self.n_vir {
                        let v = self.t2(i, j, a, b);
                        if v != 0.0 {
                            let _ = writeln!(out, "{i} {j} {a} {b} {v:.16e}");
                        }
                    }
                }
            }
        }
        if let Some(t1) = &self.t1 {
            let _ = writeln!(out, "T1 {} {} {}", self.norb, self.n_occ_alpha, self.n_occ_beta);
            for i in 0..self.n_occ {
                for a in 0..self.n_vir {
                    let v = t1[i * self.n_vir + a];
                    if v != 0.0 {
                        let _ = writeln!(out, "{i} {a} {v:.16e}");
                    }
                }
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        #[derive(PartialEq)]
        enum Block {
            None,
            T2,
            T1,
        }
        let mut amps: Option<Self> = None;
        let mut block = Block::None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let tok: Vec<&str> = line.split_whitespace().collect();
            let bad = |what: &str| Error::parse(lineno + 1, format!("{what} in `{line}`"));
            let int = |t: &str| t.parse::<usize>().map_err(|_| bad("bad index"));
            if tok[0] == "T2" || tok[0] == "T1" {
                if tok.len() != 4 {
                    return Err(bad("expected `T2 M n_occ_alpha n_occ_beta`"));
                }
                let (m, na, nb) = (int(tok[1])?, int(tok[2])?, int(tok[3])?);
                match &amps {
                    None => amps = Some(Self::zeros(m, na, nb)?),
                    Some(a) if (a.norb, a.n_occ_alpha, a.n_occ_beta) != (m, na, nb) => {
                        return Err(Error::Consistency("T1 and T2 headers disagree".into()))
                    }
                    Some(_) => {}
                }
                block = if tok[0] == "T2" { Block::T2 } else { Block::T1 };
                if block == Block::T1 {
                    let a = amps.as_mut().unwrap();
                    a.t1.get_or_insert_with(|| vec![0.0; a.n_occ * a.n_vir]);
                }
                continue;
            }
            let a = amps.as_mut().ok_or_else(|| bad("amplitude before any header"))?;
            let value = |t: &str| t.parse::<f64>().map_err(|_| bad("bad value"));
            match (&block, tok.len()) {
                (Block::T2, 5) => a.set_t2(int(tok[0])?, int(tok[1])?, int(tok[2])?, int(tok[3])?, value(tok[4])?)?,
                (Block::T1, 3) => a.set_t1(int(tok[0])?, int(tok[1])?, value(tok[2])?)?,
                _ => return Err(bad("wrong field count")),
            }
        }
        amps.ok_or_else(|| Error::parse(1, "no T2 header"))
    }
}
