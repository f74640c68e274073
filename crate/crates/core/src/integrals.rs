//! Frozen-core molecular Hamiltonians in FCIDUMP form.
//!
//! Orbital indices in the public API are 0-based. The FCIDUMP text itself is
//! 1-based; conversion happens only in [`parse_fcidump`] and [`write_fcidump`].
//!
//! Two-electron integrals use chemists' notation `(pr|qs)` and are stored once
//! per 8-fold permutation class, at the compound index `[pr, qs]` with
//! `p >= r`, `q >= s` and `pr >= qs`.

use std::fmt::Write as _;

use crate::error::{Error, Result};

#[inline]
fn pair_index(p: usize, r: usize) -> usize {
    if p >= r {
        p * (p + 1) / 2 + r
    } else {
        r * (r + 1) / 2 + p
    }
}

#[inline]
fn quad_index(p: usize, r: usize, q: usize, s: usize) -> usize {
    pair_index(pair_index(p, r), pair_index(q, s))
}

/// One- and two-electron integrals plus the scalar core energy.
#[derive(Clone, Debug, PartialEq)]
pub struct IntegralSet {
    norb: usize,
    n_alpha: usize,
    n_beta: usize,
    ms2: i64,
    e_core: f64,
    h: Vec<f64>,
    g: Vec<f64>,
}

impl IntegralSet {
    /// All-zero integrals for `norb` orbitals and the given electron counts.
    pub fn zeros(norb: usize, n_alpha: usize, n_beta: usize) -> Result<Self> {
        if n_alpha > norb || n_beta > norb {
            return Err(Error::Consistency(format!("electron counts ({n_alpha}, {n_beta}) exceed {norb} orbitals")));
        }
        if norb > 64 {
            return Err(Error::Consistency(format!("{norb} orbitals exceed the 64-bit determinant limit")));
        }
        let npair = norb * (norb + 1) / 2;
        Ok(Self {
            norb,
            n_alpha,
            n_beta,
            ms2: n_alpha as i64 - n_beta as i64,
            e_core: 0.0,
            h: vec![0.0; norb * norb],
            g: vec![0.0; npair * (npair + 1) / 2],
        })
    }

    pub fn norb(&self) -> usize {
        self.norb
    }

    pub fn n_alpha(&self) -> usize {
        self.n_alpha
    }

    pub fn n_beta(&self) -> usize {
        self.n_beta
    }

    pub fn ms2(&self) -> i64 {
        self.ms2
    }

    pub fn e_core(&self) -> f64 {
        self.e_core
    }

    pub fn set_e_core(&mut self, e: f64) {
        self.e_core = e;
    }

    /// `h_pr`, unchecked beyond the slice bound.
    #[inline]
    pub fn one_electron(&self, p: usize, r: usize) -> f64 {
        self.h[p * self.norb + r]
    }

    /// Sets `h_pr = h_rp = value`.
    pub fn set_one_electron(&mut self, p: usize, r: usize, value: f64) -> Result<()> {
        self.check(&[p, r])?;
        self.h[p * self.norb + r] = value;
        self.h[r * self.norb + p] = value;
        Ok(())
    }

    /// `(pr|qs)` for in-range indices. Hot path of the matrix-element code.
    #[inline]
    pub fn two_electron(&self, p: usize, r: usize, q: usize, s: usize) -> f64 {
        self.g[quad_index(p, r, q, s)]
    }

    /// `(pr|qs)` with bounds checking; any of the 8 equivalent orders resolves
    /// to the same stored entry.
    pub fn get_two_electron(&self, p: usize, r: usize, q: usize, s: usize) -> Result<f64> {
        self.check(&[p, r, q, s])?;
        Ok(self.two_electron(p, r, q, s))
    }

    pub fn set_two_electron(&mut self, p: usize, r: usize, q: usize, s: usize, value: f64) -> Result<()> {
        self.check(&[p, r, q, s])?;
        let idx = quad_index(p, r, q, s);
        self.g[idx] = value;
        Ok(())
    }

    fn check(&self, idx: &[usize]) -> Result<()> {
        match idx.iter().find(|&&i| i >= self.norb) {
            Some(i) => Err(Error::Index(format!("orbital index {i} outside [0, {})", self.norb))),
            None => Ok(()),
        }
    }

    /// Iterates the canonical `(p, r, q, s, value)` entries with `p >= r`,
    /// `q >= s`, `pr >= qs`, including zeros.
    pub fn canonical_two_electron(&self) -> impl Iterator<Item = (usize, usize, usize, usize, f64)> + '_ {
        let n = self.norb;
        (0..n).flat_map(move |p| {
            (0..=p).flat_map(move |r| {
                let pr = pair_index(p, r);
                (0..n).flat_map(move |q| {
                    (0..=q).filter_map(move |s| {
                        let qs = pair_index(q, s);
                        (qs <= pr).then(|| (p, r, q, s, self.two_electron(p, r, q, s)))
                    })
                })
            })
        })
    }
}

/// Parses Molpro-style FCIDUMP text.
///
/// The `&FCI ... &END` (or `/`) header must carry `NORB`, `NELEC` and `MS2`;
/// `ORBSYM`, `ISYM` and `UHF` are accepted and ignored.
pub fn parse_fcidump(text: &str) -> Result<IntegralSet> {
    let mut lines = text.lines().enumerate();

    let mut header = String::new();
    let mut header_done = false;
    let mut first = true;
    for (lineno, raw) in lines.by_ref() {
        let line = raw.trim();
        if first {
            if line.is_empty() {
                continue;
            }
            if !line.to_ascii_uppercase().starts_with("&FCI") {
                return Err(Error::parse(lineno + 1, "expected &FCI header"));
            }
            first = false;
            header.push_str(&line[4..]);
        } else {
            header.push(' ');
            header.push_str(line);
        }
        let upper = header.to_ascii_uppercase();
        if let Some(pos) = upper.find("&END").or_else(|| upper.find("$END")).or_else(|| upper.rfind('/')) {
            header.truncate(pos);
            header_done = true;
            break;
        }
    }
    if first {
        return Err(Error::parse(1, "empty input"));
    }
    if !header_done {
        return Err(Error::parse(text.lines().count(), "unterminated &FCI header"));
    }

    let (norb, nelec, ms2) = parse_header(&header)?;
    if (nelec + ms2) % 2 != 0 || nelec < ms2.abs() {
        return Err(Error::Consistency(format!("NELEC={nelec} and MS2={ms2} do not give integral spin counts")));
    }
    let n_alpha = ((nelec + ms2) / 2) as usize;
    let n_beta = ((nelec - ms2) / 2) as usize;
    let mut ints = IntegralSet::zeros(norb, n_alpha, n_beta)?;
    ints.ms2 = ms2;

    for (lineno, raw) in lines {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let mut tok = line.split_whitespace();
        let value = tok
            .next()
            .map(|t| t.replace(['D', 'd'], "E"))
            .and_then(|t| t.parse::<f64>().ok())
            .ok_or_else(|| Error::parse(lineno + 1, format!("bad integral value in `{line}`")))?;
        let mut idx = [0usize; 4];
        for slot in idx.iter_mut() {
            let t = tok.next().ok_or_else(|| Error::parse(lineno + 1, format!("expected four indices in `{line}`")))?;
            let v: i64 = t.parse().map_err(|_| Error::parse(lineno + 1, format!("bad index `{t}`")))?;
            if v < 0 || v as usize > norb {
                return Err(Error::Index(format!("line {}: index {v} outside [0, {norb}]", lineno + 1)));
            }
            *slot = v as usize;
        }
        match idx {
            [0, 0, 0, 0] => ints.e_core = value,
            [p, r, 0, 0] if p > 0 && r > 0 => ints.set_one_electron(p - 1, r - 1, value)?,
            // orbital energies
            [_, 0, 0, 0] => {}
            [p, r, q, s] if p > 0 && r > 0 && q > 0 && s > 0 => {
                ints.set_two_electron(p - 1, r - 1, q - 1, s - 1, value)?
            }
            _ => return Err(Error::parse(lineno + 1, format!("unsupported index pattern {idx:?}"))),
        }
    }
    Ok(ints)
}

fn parse_header(header: &str) -> Result<(usize, i64, i64)> {
    let mut norb = None;
    let mut nelec = None;
    let mut ms2 = None;
    // `NORB=  3` and `NORB = 3` are both seen in the wild
    let mut compact = String::with_capacity(header.len());
    for part in header.split('=') {
        if !compact.is_empty() {
            compact.truncate(compact.trim_end().len());
            compact.push('=');
            compact.push_str(part.trim_start());
        } else {
            compact.push_str(part);
        }
    }
    for item in compact.split([',', ' ', '\t']).filter(|s| !s.is_empty()) {
        let Some((key, value)) = item.split_once('=') else {
            continue;
        };
        let value = value.trim();
        let parse = |v: &str| v.parse::<i64>().map_err(|_| Error::parse(1, format!("bad header value `{item}`")));
        match key.trim().to_ascii_uppercase().as_str() {
            "NORB" => norb = Some(parse(value)?),
            "NELEC" => nelec = Some(parse(value)?),
            "MS2" => ms2 = Some(parse(value)?),
            _ => {}
        }
    }
    let norb = norb.ok_or_else(|| Error::parse(1, "header lacks NORB"))?;
    let nelec = nelec.ok_or_else(|| Error::parse(1, "header lacks NELEC"))?;
    let ms2 = ms2.unwrap_or(0);
    if norb < 0 || nelec < 0 {
        return Err(Error::parse(1, "negative NORB or NELEC"));
    }
    Ok((norb as usize, nelec, ms2))
}

fn push_value(out: &mut String, value: f64, idx: [usize; 4]) {
    let _ = writeln!(out, "{:>25.16E} {:>4} {:>4} {:>4} {:>4}", value, idx[0], idx[1], idx[2], idx[3]);
}

/// Writes FCIDUMP text: nonzero canonical two-electron entries, then the
/// lower triangle of `h`, then the core energy.
pub fn write_fcidump(ints: &IntegralSet) -> String {
    let n = ints.norb;
    let mut out = String::new();
    let _ = writeln!(out, "&FCI NORB={},NELEC={},MS2={},", n, ints.n_alpha + ints.n_beta, ints.ms2);
    let orbsym = vec!["1"; n].join(",");
    let _ = writeln!(out, "  ORBSYM={orbsym},");
    let _ = writeln!(out, "  ISYM=1,");
    let _ = writeln!(out, "&END");
    for (p, r, q, s, v) in ints.canonical_two_electron() {
        if v != 0.0 {
            push_value(&mut out, v, [p + 1, r + 1, q + 1, s + 1]);
        }
    }
    for p in 0..n {
        for r in 0..=p {
            let v = ints.one_electron(p, r);
            if v != 0.0 {
                push_value(&mut out, v, [p + 1, r + 1, 0, 0]);
            }
        }
    }
    push_value(&mut out, ints.e_core, [0, 0, 0, 0]);
    out
}
