//! Projected Hamiltonians over determinant subspaces, their lowest
//! eigenpair, and energy/variance of subspace wavefunctions.

mod davidson;

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use davidson::DavidsonOptions;

use crate::determinant::{enumerate_connected, excitation_degree, matrix_element, Determinant, DeterminantBasis};
use crate::error::{Error, Result};
use crate::integrals::IntegralSet;

const ROW_CHUNK: usize = 64;

/// How a batch of sampled configurations spans a subspace.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisMode {
    /// Cartesian product of the distinct alpha and beta strings.
    #[default]
    Product,
    /// Only the sampled (alpha, beta) pairs.
    Paired,
}

/// Builds a basis from sampled configurations.
pub fn build_basis(
    configs: &[Determinant],
    mode: BasisMode,
    norb: usize,
    n_alpha: usize,
    n_beta: usize,
) -> Result<DeterminantBasis> {
    match mode {
        BasisMode::Paired => DeterminantBasis::new(configs.to_vec(), norb, n_alpha, n_beta),
        BasisMode::Product => {
            let alpha: BTreeSet<u64> = configs.iter().map(|d| d.alpha).collect();
            let beta: BTreeSet<u64> = configs.iter().map(|d| d.beta).collect();
            product_basis(&alpha, &beta, norb, n_alpha, n_beta)
        }
    }
}

/// Cartesian product of alpha strings and beta strings.
pub fn product_basis(
    alpha: &BTreeSet<u64>,
    beta: &BTreeSet<u64>,
    norb: usize,
    n_alpha: usize,
    n_beta: usize,
) -> Result<DeterminantBasis> {
    let dets = alpha.iter().flat_map(|&a| beta.iter().map(move |&b| Determinant::new(a, b))).collect();
    DeterminantBasis::new(dets, norb, n_alpha, n_beta)
}

/// Real symmetric sparse matrix; only the upper triangle (diagonal included)
/// is stored, row-compressed.
#[derive(Clone, Debug)]
pub struct SparseSymMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseSymMatrix {
    /// From per-row upper-triangle entries `(col >= row, value)`.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let dim = rows.len();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for (i, mut row) in rows.into_iter().enumerate() {
            row.sort_by_key(|e| e.0);
            for (j, v) in row {
                debug_assert!(j >= i);
                cols.push(j);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        Self { dim, row_ptr, cols, vals }
    }

    /// Upper triangle of a dense symmetric matrix, dropping exact zeros off
    /// the diagonal.
    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let rows = (0..m.nrows())
            .map(|i| (i..m.ncols()).filter(|&j| j == i || m[(i, j)] != 0.0).map(|j| (j, m[(i, j)])).collect())
            .collect();
        Self::from_rows(rows)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz_upper(&self) -> usize {
        self.vals.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (r, c) = if i <= j { (i, j) } else { (j, i) };
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.cols[range.clone()].binary_search(&c) {
            Ok(k) => self.vals[range.start + k],
            Err(_) => 0.0,
        }
    }

    /// Whether `(i, j)` is explicitly stored.
    pub fn is_stored(&self, i: usize, j: usize) -> bool {
        let (r, c) = if i <= j { (i, j) } else { (j, i) };
        self.cols[self.row_ptr[r]..self.row_ptr[r + 1]].binary_search(&c).is_ok()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        for i in 0..self.dim {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.cols[k];
                let v = self.vals[k];
                acc += v * x[j];
                if j != i {
                    y[j] += v * x[i];
                }
            }
            y[i] += acc;
        }
        y
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.cols[k];
                m[(i, j)] = self.vals[k];
                m[(j, i)] = self.vals[k];
            }
        }
        m
    }
}

/// `H_ij = <det_i|H|det_j>` over the basis, keeping pairs at most two
/// excitations apart.
pub fn project_hamiltonian(basis: &DeterminantBasis, ints: &IntegralSet) -> SparseSymMatrix {
    let dets = basis.dets();
    let d = dets.len();
    let n_conn = dets.first().map(|a| enumerate_connected(a, basis.norb()).len()).unwrap_or(0);
    let scan = d <= 2 * n_conn.max(1);

    let rows: Vec<Vec<(usize, f64)>> = (0..d)
        .into_par_iter()
        .with_min_len(ROW_CHUNK)
        .map(|i| {
            let a = &dets[i];
            let mut row = vec![(i, matrix_element(a, a, ints))];
            if scan {
                for (j, b) in dets.iter().enumerate().skip(i + 1) {
                    if excitation_degree(a, b) <= 2 {
                        let v = matrix_element(a, b, ints);
                        if v != 0.0 {
                            row.push((j, v));
                        }
                    }
                }
            } else {
                for b in enumerate_connected(a, basis.norb()) {
                    if let Some(j) = basis.position(&b) {
                        if j > i {
                            let v = matrix_element(a, &b, ints);
                            if v != 0.0 {
                                row.push((j, v));
                            }
                        }
                    }
                }
            }
            row
        })
        .collect();
    SparseSymMatrix::from_rows(rows)
}

/// Solver controls for [`ground_state`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Dense diagonalization up to this dimension, Davidson above it.
    pub dense_cutoff: usize,
    pub restart_dim: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-9, max_iter: 1000, dense_cutoff: 2000, restart_dim: 20 }
    }
}

/// Makes the largest-magnitude entry positive (first one on ties).
pub fn fix_sign(v: &mut [f64]) {
    let mut best = 0usize;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|x| *x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Lowest eigenpair of a projected Hamiltonian as `(energy, coefficients)`.
pub fn lowest_eigenpair(h: &SparseSymMatrix, opts: &SolverOptions) -> Result<(f64, Vec<f64>)> {
    let (e, mut v) = if h.dim() <= opts.dense_cutoff {
        dense_lowest(&h.to_dense())
    } else {
        let dopts = DavidsonOptions { tol: opts.tol, max_iter: opts.max_iter, restart_dim: opts.restart_dim };
        let (e, v, _) = davidson::lowest_eigenpair(h, &dopts)?;
        (e, v)
    };
    fix_sign(&mut v);
    Ok((e, v))
}

pub(crate) fn dense_lowest(m: &DMatrix<f64>) -> (f64, Vec<f64>) {
    let eig = SymmetricEigen::new(m.clone());
    let (i, e) =
        eig.eigenvalues.iter().copied().enumerate().min_by(|a, b| a.1.total_cmp(&b.1)).expect("nonempty matrix");
    (e, eig.eigenvectors.column(i).iter().copied().collect())
}

/// Lowest eigenpair of `h` as a wavefunction over `basis`.
pub fn ground_state(
    h: &SparseSymMatrix,
    basis: &DeterminantBasis,
    opts: &SolverOptions,
) -> Result<(f64, SubspaceWavefunction)> {
    if h.dim() != basis.len() {
        return Err(Error::Shape(format!("matrix dimension {} vs basis size {}", h.dim(), basis.len())));
    }
    let (e, v) = lowest_eigenpair(h, opts)?;
    Ok((e, SubspaceWavefunction::new(basis.clone(), v)?))
}

/// Normalized real amplitudes over a determinant basis.
#[derive(Clone, Debug, PartialEq)]
pub struct SubspaceWavefunction {
    basis: DeterminantBasis,
    coeffs: Vec<f64>,
}

impl SubspaceWavefunction {
    /// Normalizes `coeffs`.
    pub fn new(basis: DeterminantBasis, mut coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != basis.len() {
            return Err(Error::Shape(format!("{} coefficients for {} determinants", coeffs.len(), basis.len())));
        }
        let n = coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::Configuration("wavefunction has zero or non-finite norm".into()));
        }
        coeffs.iter_mut().for_each(|c| *c /= n);
        Ok(Self { basis, coeffs })
    }

    pub fn basis(&self) -> &DeterminantBasis {
        &self.basis
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn amplitude(&self, d: &Determinant) -> f64 {
        self.basis.position(d).map_or(0.0, |i| self.coeffs[i])
    }

    /// Expected occupations `<a+_ps a_ps>`: alpha orbitals first, then beta.
    pub fn occupations(&self) -> Vec<f64> {
        let m = self.basis.norb();
        let mut n = vec![0.0; 2 * m];
        for (d, c) in self.basis.dets().iter().zip(&self.coeffs) {
            let w = c * c;
            for p in crate::determinant::bits(d.alpha) {
                n[p] += w;
            }
            for p in crate::determinant::bits(d.beta) {
                n[m + p] += w;
            }
        }
        n
    }

    /// Text form: `M n_alpha n_beta d` header, then `bitstring coefficient`.
    pub fn to_text(&self) -> String {
        let m = self.basis.norb();
        let mut out = format!("{} {} {} {}\n", m, self.basis.n_alpha(), self.basis.n_beta(), self.len());
        for (d, c) in self.basis.dets().iter().zip(&self.coeffs) {
            let _ = writeln!(out, "{} {:.16e}", d.to_bitstring(m), c);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| Error::parse(1, "empty wavefunction file"))?;
        let fields: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::parse(1, format!("bad header field `{t}`"))))
            .collect::<Result<_>>()?;
        let [m, na, nb, d] = fields[..] else {
            return Err(Error::parse(1, "header must be `M n_alpha n_beta d`"));
        };
        let mut dets = Vec::with_capacity(d);
        let mut coeffs = Vec::with_capacity(d);
        for (lineno, line) in lines {
            let mut tok = line.split_whitespace();
            let (Some(bs), Some(c), None) = (tok.next(), tok.next(), tok.next()) else {
                return Err(Error::parse(lineno + 1, "expected `bitstring coefficient`"));
            };
            let (det, norb) = Determinant::parse_bitstring(bs)?;
            if norb != m {
                return Err(Error::parse(lineno + 1, format!("bitstring length {} for M = {m}", 2 * norb)));
            }
            dets.push(det);
            coeffs.push(c.parse().map_err(|_| Error::parse(lineno + 1, format!("bad coefficient `{c}`")))?);
        }
        if dets.len() != d {
            return Err(Error::Consistency(format!("header promises {d} determinants, found {}", dets.len())));
        }
        let basis = DeterminantBasis::new(dets.clone(), m, na, nb)?;
        let mut ordered = vec![0.0; basis.len()];
        for (det, c) in dets.iter().zip(coeffs) {
            ordered[basis.position(det).unwrap()] = c;
        }
        Self::new(basis, ordered)
    }
}

/// One (E, V) pair, labelled by subspace fraction and batch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyVariancePoint {
    pub energy: f64,
    pub variance: f64,
    pub zeta: f64,
    pub batch: usize,
}

impl EnergyVariancePoint {
    pub fn labelled(mut self, zeta: f64, batch: usize) -> Self {
        self.zeta = zeta;
        self.batch = batch;
        self
    }
}

/// `sigma = H psi` over the basis and everything connected to it. Chunked
/// accumulation merged in chunk order, so the result is independent of the
/// thread count.
pub fn apply_hamiltonian(psi: &SubspaceWavefunction, ints: &IntegralSet) -> HashMap<Determinant, f64> {
    let dets = psi.basis().dets();
    let coeffs = psi.coeffs();
    let norb = ints.norb();
    let chunks: Vec<HashMap<Determinant, f64>> = (0..dets.len())
        .collect::<Vec<_>>()
        .par_chunks(ROW_CHUNK)
        .map(|idx| {
            let mut acc: HashMap<Determinant, f64> = HashMap::new();
            for &i in idx {
                let (a, c) = (&dets[i], coeffs[i]);
                if c == 0.0 {
                    continue;
                }
                *acc.entry(*a).or_default() += matrix_element(a, a, ints) * c;
                for b in enumerate_connected(a, norb) {
                    let v = matrix_element(&b, a, ints);
                    if v != 0.0 {
                        *acc.entry(b).or_default() += v * c;
                    }
                }
            }
            acc
        })
        .collect();
    let mut sigma: HashMap<Determinant, f64> = HashMap::new();
    for chunk in chunks {
        for (k, v) in chunk {
            *sigma.entry(k).or_default() += v;
        }
    }
    sigma
}

/// Energy `<psi|H|psi>` and variance `<psi|H^2|psi> - <psi|H|psi>^2`, exact
/// over the connected space.
pub fn energy_and_variance(psi: &SubspaceWavefunction, ints: &IntegralSet) -> EnergyVariancePoint {
    let sigma = apply_hamiltonian(psi, ints);
    let energy: f64 =
        psi.basis().dets().iter().zip(psi.coeffs()).map(|(d, c)| c * sigma.get(d).copied().unwrap_or(0.0)).sum();
    let mut entries: Vec<(Determinant, f64)> = sigma.into_iter().collect();
    entries.sort_unstable_by_key(|a| a.0);
    let norm2: f64 = entries.iter().map(|(_, v)| v * v).sum();
    let mut variance = norm2 - energy * energy;
    if (-1e-10..0.0).contains(&variance) {
        variance = 0.0;
    }
    EnergyVariancePoint { energy, variance, zeta: 0.0, batch: 0 }
}

/// Rayleigh quotient within the projected matrix.
pub fn projected_energy(h: &SparseSymMatrix, coeffs: &[f64]) -> f64 {
    h.matvec(coeffs).iter().zip(coeffs).map(|(a, b)| a * b).sum()
}
