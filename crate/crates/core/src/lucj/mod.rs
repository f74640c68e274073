//! Local unitary cluster Jastrow (LUCJ) states: parameters from CC
//! amplitudes, exact simulation in the fixed-particle-number sector,
//! noisy bitstring sampling and hardware resource estimates.
//!
//! The state is `e^{K} e^{iJ} e^{-K} |ref>` with a single layer. `K` is a
//! real antisymmetric one-body generator shared by both spins and the
//! Jastrow operator is
//!
//! ```text
//! J = sum_s sum_{p,q} J_same[p][q] n_ps n_qs + 2 sum_{p,q} J_cross[p][q] n_pa n_qb
//! ```
//!
//! restricted to hardware-local pairs: same-spin neighbours `|p - q| = 1` and
//! opposite-spin on-site terms at `p % 4 == 0`.

mod amplitudes;
mod resources;
mod sampling;

use std::collections::HashMap;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

pub use amplitudes::Amplitudes;
pub use resources::{estimate_resources, ResourceEstimate};
pub use sampling::{sample_bitstrings, NoiseModel, SampleSet};

use crate::determinant::{bits, strings, Determinant};
use crate::error::{Error, Result};
use crate::subspace::fix_sign;

/// Largest simulable qubit count (2M).
pub const MAX_SIMULATED_QUBITS: usize = 28;

/// Which Jastrow couplings survive the locality truncation.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalityLayout {
    /// `(p, p + 1)` same-spin neighbour pairs.
    pub same_spin: Vec<(usize, usize)>,
    /// Orbitals with an alpha-beta on-site coupling.
    pub cross_spin: Vec<usize>,
}

impl LocalityLayout {
    pub fn for_orbitals(norb: usize) -> Self {
        Self {
            same_spin: (0..norb.saturating_sub(1)).map(|p| (p, p + 1)).collect(),
            cross_spin: (0..norb).filter(|p| p % 4 == 0).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LucjParams {
    pub norb: usize,
    /// Antisymmetric orbital-rotation generator.
    pub k: DMatrix<f64>,
    /// Symmetric same-spin couplings, nonzero only for `|p - q| = 1`.
    pub j_same: DMatrix<f64>,
    /// Opposite-spin couplings, nonzero only on the diagonal at `p % 4 == 0`.
    pub j_cross: DMatrix<f64>,
    /// Optional final orbital rotation built from t1.
    pub k_final: Option<DMatrix<f64>>,
    pub layout: LocalityLayout,
    /// Set when the t2 input was identically zero.
    pub zero_amplitudes: bool,
}

impl LucjParams {
    /// `K = 0`, `J = 0`.
    pub fn identity(norb: usize) -> Self {
        Self {
            norb,
            k: DMatrix::zeros(norb, norb),
            j_same: DMatrix::zeros(norb, norb),
            j_cross: DMatrix::zeros(norb, norb),
            k_final: None,
            layout: LocalityLayout::for_orbitals(norb),
            zero_amplitudes: true,
        }
    }

    /// Params from explicit matrices; Jastrow entries outside the layout are
    /// zeroed and `k` is antisymmetrized.
    pub fn from_parts(k: DMatrix<f64>, j_same: &DMatrix<f64>, j_cross: &DMatrix<f64>) -> Result<Self> {
        let n = k.nrows();
        if k.ncols() != n || j_same.shape() != (n, n) || j_cross.shape() != (n, n) {
            return Err(Error::Shape("LUCJ matrices must all be M x M".into()));
        }
        let k = (&k - k.transpose()) * 0.5;
        let (j_same, j_cross) = apply_locality(j_same, j_cross);
        Ok(Self {
            norb: n,
            k,
            j_same,
            j_cross,
            k_final: None,
            layout: LocalityLayout::for_orbitals(n),
            zero_amplitudes: false,
        })
    }

    /// Jastrow phase of one determinant.
    pub fn jastrow_phase(&self, d: &Determinant) -> f64 {
        let mut phase = 0.0;
        for mask in [d.alpha, d.beta] {
            for &(p, q) in &self.layout.same_spin {
                if mask >> p & 1 == 1 && mask >> q & 1 == 1 {
                    phase += self.j_same[(p, q)] + self.j_same[(q, p)];
                }
            }
        }
        for &p in &self.layout.cross_spin {
            if d.alpha >> p & 1 == 1 && d.beta >> p & 1 == 1 {
                phase += 2.0 * self.j_cross[(p, p)];
            }
        }
        phase
    }
}

/// Zeroes every Jastrow entry outside the LUCJ locality list.
pub fn apply_locality(j_same: &DMatrix<f64>, j_cross: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = j_same.nrows();
    let same =
        DMatrix::from_fn(n, n, |p, q| if p.abs_diff(q) == 1 { 0.5 * (j_same[(p, q)] + j_same[(q, p)]) } else { 0.0 });
    let cross = DMatrix::from_fn(n, n, |p, q| if p == q && p % 4 == 0 { j_cross[(p, q)] } else { 0.0 });
    (same, cross)
}

/// Rank-one double factorization of t2 before any locality truncation:
/// `t2[i,j,a,b] ~ sum_pq j_full[p][q] U[a,p] U[i,p] U[b,q] U[j,q]`.
#[derive(Clone, Debug)]
pub struct DoubleFactorization {
    /// Dominant eigenvalue of the `(ia) x (jb)` amplitude matrix.
    pub lambda: f64,
    /// Orthogonal orbital rotation, `det = +1`.
    pub rotation: DMatrix<f64>,
    /// Eigenvalues of the one-body factor.
    pub z: Vec<f64>,
    /// `lambda * z z^T`.
    pub j_full: DMatrix<f64>,
}

/// Dominant-eigenpair factorization of t2; `None` when t2 vanishes.
pub fn double_factorize(t2: &Amplitudes) -> Option<DoubleFactorization> {
    let (no, nv, m) = (t2.n_occ, t2.n_vir, t2.norb);
    let dim = no * nv;
    if t2.is_zero() || dim == 0 {
        return None;
    }
    let t = DMatrix::from_fn(dim, dim, |x, y| {
        let (i, a, j, b) = (x / nv, x % nv, y / nv, y % nv);
        0.5 * (t2.t2(i, j, a, b) + t2.t2(j, i, b, a))
    });
    let eig = SymmetricEigen::new(t);
    let (k, lambda) = eig.eigenvalues.iter().copied().enumerate().max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))?;
    let mut v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
    fix_sign(&mut v);

    let mut one_body = DMatrix::<f64>::zeros(m, m);
    for i in 0..no {
        for a in 0..nv {
            one_body[(i, no + a)] = v[i * nv + a];
            one_body[(no + a, i)] = v[i * nv + a];
        }
    }
    let eig = SymmetricEigen::new(one_body);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));
    let z: Vec<f64> = order.iter().map(|&c| eig.eigenvalues[c]).collect();
    let mut rotation = DMatrix::<f64>::zeros(m, m);
    for (dst, &src) in order.iter().enumerate() {
        let mut col: Vec<f64> = eig.eigenvectors.column(src).iter().copied().collect();
        fix_sign(&mut col);
        rotation.set_column(dst, &nalgebra::DVector::from_vec(col));
    }
    if rotation.determinant() < 0.0 {
        let last = m - 1;
        let flipped = -rotation.column(last);
        rotation.set_column(last, &flipped);
    }
    let j_full = DMatrix::from_fn(m, m, |p, q| lambda * z[p] * z[q]);
    Some(DoubleFactorization { lambda, rotation, z, j_full })
}

/// Real logarithm of a proper orthogonal matrix, antisymmetric.
pub fn orthogonal_log(u: &DMatrix<f64>) -> DMatrix<f64> {
    let n = u.nrows();
    let sym = (u + u.transpose()) * 0.5;
    let anti = (u - u.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut k = DMatrix::<f64>::zeros(n, n);
    // half-turn eigenspace (cos = -1) needs explicit pi rotations
    let mut half_turn = Vec::new();
    let mut f = DMatrix::<f64>::zeros(n, n);
    for c in 0..n {
        let cos = eig.eigenvalues[c].clamp(-1.0, 1.0);
        let w = eig.eigenvectors.column(c);
        if cos < -1.0 + 1e-10 {
            half_turn.push(w.clone_owned());
            continue;
        }
        let theta = cos.acos();
        let scale = if theta < 1e-8 { 1.0 } else { theta / theta.sin() };
        f += w * w.transpose() * scale;
    }
    k += &f * &anti;
    // U acts as -1 on this even-dimensional subspace: pi rotation per plane
    for pair in half_turn.chunks(2) {
        if let [a, b] = pair {
            k += (b * a.transpose() - a * b.transpose()) * std::f64::consts::PI;
        }
    }
    (&k - k.transpose()) * 0.5
}

/// LUCJ parameters from CC amplitudes (single layer, rank-one factorization).
pub fn build_lucj_params(amps: &Amplitudes) -> LucjParams {
    let m = amps.norb;
    let mut params = match double_factorize(amps) {
        None => {
            log::warn!("t2 amplitudes vanish; using the identity LUCJ circuit");
            LucjParams::identity(m)
        }
        Some(df) => {
            let k = orthogonal_log(&df.rotation);
            let (j_same, j_cross) = apply_locality(&df.j_full, &df.j_full);
            LucjParams {
                norb: m,
                k,
                j_same,
                j_cross,
                k_final: None,
                layout: LocalityLayout::for_orbitals(m),
                zero_amplitudes: false,
            }
        }
    };
    if amps.has_t1() {
        let mut k1 = DMatrix::<f64>::zeros(m, m);
        for i in 0..amps.n_occ {
            for a in 0..amps.n_vir {
                let t = amps.t1(i, a).unwrap_or(0.0);
                k1[(amps.n_occ + a, i)] = t;
                k1[(i, amps.n_occ + a)] = -t;
            }
        }
        params.k_final = Some(k1);
    }
    params
}

/// Amplitudes over the fixed-(n_alpha, n_beta) sector, index
/// `ia * n_beta_strings + ib`.
#[derive(Clone, Debug)]
pub struct SectorState {
    pub norb: usize,
    pub n_alpha: usize,
    pub n_beta: usize,
    pub alpha_strings: Vec<u64>,
    pub beta_strings: Vec<u64>,
    pub amplitudes: Vec<Complex64>,
}

impl SectorState {
    pub fn determinant(&self, idx: usize) -> Determinant {
        let nb = self.beta_strings.len();
        Determinant::new(self.alpha_strings[idx / nb], self.beta_strings[idx % nb])
    }

    pub fn amplitude(&self, d: &Determinant) -> Complex64 {
        let ia = self.alpha_strings.binary_search(&d.alpha);
        let ib = self.beta_strings.binary_search(&d.beta);
        match (ia, ib) {
            (Ok(ia), Ok(ib)) => self.amplitudes[ia * self.beta_strings.len() + ib],
            _ => Complex64::new(0.0, 0.0),
        }
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }
}

/// Single-excitation table of one spin sector: per string, the entries
/// `(target string, p, q, sign)` of `a+_p a_q`.
struct ExcitationTable {
    entries: Vec<Vec<(usize, usize, usize, f64)>>,
}

impl ExcitationTable {
    fn new(strs: &[u64], norb: usize) -> Self {
        let index: HashMap<u64, usize> = strs.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let full = crate::determinant::low_mask(norb);
        let entries = strs
            .iter()
            .map(|&s| {
                let mut row = Vec::new();
                for q in bits(s) {
                    let removed = s ^ (1 << q);
                    let s1 = parity(s, q);
                    for p in bits(full & !s) {
                        let sign = s1 * parity(removed, p);
                        row.push((index[&(removed | 1 << p)], p, q, sign));
                    }
                }
                row
            })
            .collect();
        Self { entries }
    }
}

fn parity(mask: u64, p: usize) -> f64 {
    if (mask & crate::determinant::low_mask(p)).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `y = K psi` for the spin-summed one-body generator.
fn apply_one_body(
    k: &DMatrix<f64>,
    alpha: &ExcitationTable,
    beta: &ExcitationTable,
    nb: usize,
    psi: &[Complex64],
) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); psi.len()];
    for (ia, row) in alpha.entries.iter().enumerate() {
        for &(ta, p, q, sign) in row {
            let c = k[(p, q)] * sign;
            if c == 0.0 {
                continue;
            }
            let (src, dst) = (ia * nb, ta * nb);
            for ib in 0..nb {
                out[dst + ib] += psi[src + ib] * c;
            }
        }
    }
    let na = psi.len() / nb.max(1);
    for (ib, row) in beta.entries.iter().enumerate() {
        for &(tb, p, q, sign) in row {
            let c = k[(p, q)] * sign;
            if c == 0.0 {
                continue;
            }
            for ia in 0..na {
                out[ia * nb + tb] += psi[ia * nb + ib] * c;
            }
        }
    }
    out
}

/// `e^{K} psi` by a scaled Taylor series.
fn expmv(
    k: &DMatrix<f64>,
    alpha: &ExcitationTable,
    beta: &ExcitationTable,
    nb: usize,
    n_electrons: usize,
    mut psi: Vec<Complex64>,
) -> Vec<Complex64> {
    let col_sum = (0..k.ncols()).map(|c| k.column(c).iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max);
    let bound = col_sum * n_electrons.max(1) as f64;
    if bound == 0.0 {
        return psi;
    }
    let steps = (bound / 0.5).ceil().max(1.0) as usize;
    let scaled = k / steps as f64;
    let vnorm = |v: &[Complex64]| v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for _ in 0..steps {
        let mut term = psi.clone();
        let mut acc = psi.clone();
        let base = vnorm(&psi).max(1e-300);
        for order in 1..=60 {
            term = apply_one_body(&scaled, alpha, beta, nb, &term);
            let inv = 1.0 / order as f64;
            term.iter_mut().for_each(|t| *t *= inv);
            acc.iter_mut().zip(&term).for_each(|(a, t)| *a += t);
            if vnorm(&term) < 1e-17 * base {
                break;
            }
        }
        psi = acc;
    }
    psi
}

/// Exact LUCJ state in the sector of `reference`.
pub fn simulate_lucj_state(params: &LucjParams, reference: &Determinant) -> Result<SectorState> {
    let m = params.norb;
    if 2 * m > MAX_SIMULATED_QUBITS {
        return Err(Error::Resource(format!("{} qubits exceed the simulation cap of {MAX_SIMULATED_QUBITS}", 2 * m)));
    }
    if !reference.fits(m) {
        return Err(Error::Configuration(format!("reference has orbitals beyond M = {m}")));
    }
    let (na, nb) = (reference.n_alpha(), reference.n_beta());
    let alpha_strings = strings(m, na);
    let beta_strings = strings(m, nb);

    // e^{-K}|ref>: each spin's occupied orbitals rotated by exp(-K)
    let u_neg = (-&params.k).exp();
    let rotated = |strs: &[u64], occ: u64| -> Vec<f64> {
        let cols: Vec<usize> = bits(occ).collect();
        strs.iter()
            .map(|&s| {
                let rows: Vec<usize> = bits(s).collect();
                if rows.is_empty() {
                    return 1.0;
                }
                DMatrix::from_fn(rows.len(), cols.len(), |r, c| u_neg[(rows[r], cols[c])]).determinant()
            })
            .collect()
    };
    let ca = rotated(&alpha_strings, reference.alpha);
    let cb = rotated(&beta_strings, reference.beta);
    let n_b = beta_strings.len();

    let mut psi: Vec<Complex64> = Vec::with_capacity(ca.len() * n_b);
    for (ia, &xa) in ca.iter().enumerate() {
        for (ib, &xb) in cb.iter().enumerate() {
            let d = Determinant::new(alpha_strings[ia], beta_strings[ib]);
            psi.push(Complex64::from_polar(xa * xb, params.jastrow_phase(&d)));
        }
    }

    let ta = ExcitationTable::new(&alpha_strings, m);
    let tb = ExcitationTable::new(&beta_strings, m);
    psi = expmv(&params.k, &ta, &tb, n_b, na + nb, psi);
    if let Some(k1) = &params.k_final {
        psi = expmv(k1, &ta, &tb, n_b, na + nb, psi);
    }
    let norm = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    psi.iter_mut().for_each(|a| *a /= norm);

    Ok(SectorState { norb: m, n_alpha: na, n_beta: nb, alpha_strings, beta_strings, amplitudes: psi })
}
