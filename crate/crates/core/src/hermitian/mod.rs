//! Dense Hermitian operators on finite chains of `d`-level sites.
//!
//! Composite indices are row-major with site 1 as the leftmost (most significant)
//! tensor factor. Sites are numbered from 1 in every public function.

mod io;
mod pauli;

pub use io::{
    hamiltonian_from_json, hamiltonian_to_json, read_density_text, write_density_text,
};
pub use pauli::{
    Pauli, PauliString, PauliTwoBodyHamiltonian, matrix_to_pauli, matrix_to_pauli_raw,
    pauli_to_matrix,
};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex;

use crate::{Error, Result};

pub type C64 = Complex<f64>;

/// Entrywise Hermiticity tolerance maintained by every constructed operator.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Inputs further than this (relative to their largest entry) from Hermitian are rejected
/// rather than symmetrized.
pub const HERMITIAN_REJECT: f64 = 1e-8;
pub const DENSITY_TOL: f64 = 1e-10;

const EIG_MAX_SWEEPS: usize = 10_000;

#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOp {
    local_dim: usize,
    sites: usize,
    mat: DMatrix<C64>,
}

pub(crate) fn pow(d: usize, m: usize) -> usize {
    d.checked_pow(m as u32).expect("Hilbert space dimension overflows usize")
}

impl HermitianOp {
    /// Wraps `mat`, symmetrizing it to `(A + A†)/2`.
    pub fn new(local_dim: usize, sites: usize, mat: DMatrix<C64>) -> Result<Self> {
        if local_dim < 2 || sites == 0 {
            return Err(Error::InvalidArgument(format!(
                "need local_dim >= 2 and sites >= 1, got {local_dim} and {sites}"
            )));
        }
        let dim = pow(local_dim, sites);
        if mat.nrows() != dim || mat.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for {sites} sites of dimension {local_dim}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let scale = mat.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let mut dev: f64 = 0.0;
        for i in 0..dim {
            for j in 0..=i {
                dev = dev.max((mat[(i, j)] - mat[(j, i)].conj()).norm());
            }
        }
        if dev > HERMITIAN_REJECT * scale {
            return Err(Error::NotHermitian(dev));
        }
        Ok(Self::from_matrix_unchecked(local_dim, sites, mat))
    }

    /// Symmetrizes without the deviation check.
    pub(crate) fn from_matrix_unchecked(local_dim: usize, sites: usize, mat: DMatrix<C64>) -> Self {
        let adj = mat.adjoint();
        let mat = (mat + adj) * C64::new(0.5, 0.0);
        Self { local_dim, sites, mat }
    }

    pub fn identity(local_dim: usize, sites: usize) -> Self {
        let dim = pow(local_dim, sites);
        Self { local_dim, sites, mat: DMatrix::identity(dim, dim) }
    }

    pub fn zeros(local_dim: usize, sites: usize) -> Self {
        let dim = pow(local_dim, sites);
        Self { local_dim, sites, mat: DMatrix::zeros(dim, dim) }
    }

    pub fn from_real_diagonal(local_dim: usize, sites: usize, diag: &[f64]) -> Result<Self> {
        let dim = pow(local_dim, sites);
        if diag.len() != dim {
            return Err(Error::DimensionMismatch(format!(
                "{} diagonal entries for dimension {dim}",
                diag.len()
            )));
        }
        let mut mat = DMatrix::zeros(dim, dim);
        for (i, &x) in diag.iter().enumerate() {
            mat[(i, i)] = C64::new(x, 0.0);
        }
        Ok(Self { local_dim, sites, mat })
    }

    /// `|v⟩⟨v|` for a (not necessarily normalized) vector.
    pub fn projector(local_dim: usize, sites: usize, v: &[C64]) -> Result<Self> {
        let dim = pow(local_dim, sites);
        if v.len() != dim {
            return Err(Error::DimensionMismatch(format!("vector of length {} for dimension {dim}", v.len())));
        }
        let mat = DMatrix::from_fn(dim, dim, |i, j| v[i] * v[j].conj());
        Ok(Self::from_matrix_unchecked(local_dim, sites, mat))
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.mat
    }

    pub fn trace(&self) -> f64 {
        self.mat.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Hilbert–Schmidt inner product `tr(A B)`, real for Hermitian arguments.
    pub fn inner(&self, other: &HermitianOp) -> f64 {
        self.mat
            .iter()
            .zip(other.mat.iter())
            .map(|(a, b)| (a.conj() * b).re)
            .sum()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { local_dim: self.local_dim, sites: self.sites, mat: &self.mat * C64::new(c, 0.0) }
    }

    pub fn add(&self, other: &HermitianOp) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self { local_dim: self.local_dim, sites: self.sites, mat: &self.mat + &other.mat })
    }

    pub fn sub(&self, other: &HermitianOp) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self { local_dim: self.local_dim, sites: self.sites, mat: &self.mat - &other.mat })
    }

    pub fn is_real(&self) -> bool {
        self.mat.iter().all(|z| z.im == 0.0)
    }

    /// Drops the imaginary part, i.e. projects onto real symmetric matrices.
    pub fn real_part(&self) -> Self {
        Self { local_dim: self.local_dim, sites: self.sites, mat: self.mat.map(|z| C64::new(z.re, 0.0)) }
    }

    pub fn max_hermitian_deviation(&self) -> f64 {
        let n = self.dim();
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in 0..=i {
                dev = dev.max((self.mat[(i, j)] - self.mat[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// Real expectation value `⟨v|A|v⟩`.
    pub fn expectation(&self, v: &[C64]) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            let mut row = C64::new(0.0, 0.0);
            for j in 0..n {
                row += self.mat[(i, j)] * v[j];
            }
            acc += (v[i].conj() * row).re;
        }
        acc
    }

    fn check_same_shape(&self, other: &HermitianOp) -> Result<()> {
        if self.local_dim != other.local_dim || self.sites != other.sites {
            return Err(Error::DimensionMismatch(format!(
                "({}, {} sites) vs ({}, {} sites)",
                self.local_dim, self.sites, other.local_dim, other.sites
            )));
        }
        Ok(())
    }
}

/// A positive semidefinite, unit-trace [`HermitianOp`].
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    op: HermitianOp,
}

impl DensityMatrix {
    pub fn new(op: HermitianOp) -> Result<Self> {
        let tr = op.trace();
        if (tr - 1.0).abs() > DENSITY_TOL {
            return Err(Error::NotDensity(format!("trace {tr}")));
        }
        let min = hermitian_eig(&op)?.values[0];
        if min < -DENSITY_TOL {
            return Err(Error::NotDensity(format!("minimum eigenvalue {min:.3e}")));
        }
        Ok(Self { op })
    }

    pub(crate) fn new_unchecked(op: HermitianOp) -> Self {
        Self { op }
    }

    pub fn maximally_mixed(local_dim: usize, sites: usize) -> Self {
        let op = HermitianOp::identity(local_dim, sites);
        let dim = op.dim() as f64;
        Self { op: op.scaled(1.0 / dim) }
    }

    /// `|ψ⟩⟨ψ|/⟨ψ|ψ⟩`.
    pub fn pure(local_dim: usize, sites: usize, psi: &[C64]) -> Result<Self> {
        let norm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if norm2 <= 0.0 {
            return Err(Error::InvalidArgument("zero state vector".into()));
        }
        let op = HermitianOp::projector(local_dim, sites, psi)?.scaled(1.0 / norm2);
        Ok(Self { op })
    }

    /// Product basis state with the given site levels.
    pub fn basis_state(local_dim: usize, levels: &[usize]) -> Result<Self> {
        let sites = levels.len();
        let dim = pow(local_dim, sites);
        let mut idx = 0;
        for &l in levels {
            if l >= local_dim {
                return Err(Error::InvalidArgument(format!("level {l} for local dimension {local_dim}")));
            }
            idx = idx * local_dim + l;
        }
        let mut diag = vec![0.0; dim];
        diag[idx] = 1.0;
        Ok(Self { op: HermitianOp::from_real_diagonal(local_dim, sites, &diag)? })
    }

    pub fn op(&self) -> &HermitianOp {
        &self.op
    }

    pub fn into_op(self) -> HermitianOp {
        self.op
    }

    pub fn sites(&self) -> usize {
        self.op.sites
    }

    pub fn local_dim(&self) -> usize {
        self.op.local_dim
    }

    /// `tr(ρ A)`.
    pub fn expect(&self, a: &HermitianOp) -> f64 {
        self.op.inner(a)
    }
}

/// Eigendecomposition with ascending eigenvalues and orthonormal eigenvector columns.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<C64>,
}

impl Eigen {
    /// `V diag(f(λ)) V†`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> DMatrix<C64> {
        let mut scaled = self.vectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= C64::new(f(self.values[j]), 0.0);
        }
        scaled * self.vectors.adjoint()
    }
}

pub fn hermitian_eig(a: &HermitianOp) -> Result<Eigen> {
    eig_matrix(a.mat.clone())
}

pub(crate) fn eig_matrix(mat: DMatrix<C64>) -> Result<Eigen> {
    if mat.iter().all(|z| z.im == 0.0) {
        return eig_real(mat.map(|z| z.re));
    }
    let n = mat.nrows();
    let eig = SymmetricEigen::try_new(mat, f64::EPSILON, EIG_MAX_SWEEPS).ok_or(Error::NoConvergence {
        routine: "hermitian_eig",
        iterations: EIG_MAX_SWEEPS,
    })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(Eigen { values, vectors })
}

/// Real symmetric input: same decomposition at a fraction of the cost.
fn eig_real(mat: DMatrix<f64>) -> Result<Eigen> {
    let n = mat.nrows();
    let eig = SymmetricEigen::try_new(mat, f64::EPSILON, EIG_MAX_SWEEPS).ok_or(Error::NoConvergence {
        routine: "hermitian_eig",
        iterations: EIG_MAX_SWEEPS,
    })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| C64::new(eig.eigenvectors[(r, order[c])], 0.0));
    Ok(Eigen { values, vectors })
}

pub fn kron(a: &HermitianOp, b: &HermitianOp) -> Result<HermitianOp> {
    if a.local_dim != b.local_dim {
        return Err(Error::DimensionMismatch(format!(
            "local dimensions {} and {}",
            a.local_dim, b.local_dim
        )));
    }
    Ok(HermitianOp { local_dim: a.local_dim, sites: a.sites + b.sites, mat: a.mat.kronecker(&b.mat) })
}

/// Reduced operator on the sites in `keep` (1-based), in the order given.
pub fn partial_trace(op: &HermitianOp, keep: &[usize]) -> Result<HermitianOp> {
    let (d, m) = (op.local_dim, op.sites);
    if keep.is_empty() {
        return Err(Error::InvalidSite("empty keep set".into()));
    }
    let mut seen = vec![false; m];
    for &s in keep {
        if s == 0 || s > m {
            return Err(Error::InvalidSite(format!("site {s} on a {m}-site operator")));
        }
        if std::mem::replace(&mut seen[s - 1], true) {
            return Err(Error::InvalidSite(format!("site {s} listed twice")));
        }
    }
    let traced: Vec<usize> = (1..=m).filter(|s| !seen[s - 1]).collect();
    let dk = pow(d, keep.len());
    let dt = pow(d, traced.len());
    let strides: Vec<usize> = (0..m).map(|k| pow(d, m - 1 - k)).collect();
    let offset = |sites: &[usize], mut idx: usize| -> usize {
        let mut full = 0;
        for &s in sites.iter().rev() {
            full += (idx % d) * strides[s - 1];
            idx /= d;
        }
        full
    };
    let keep_off: Vec<usize> = (0..dk).map(|k| offset(keep, k)).collect();
    let trace_off: Vec<usize> = (0..dt).map(|t| offset(&traced, t)).collect();
    let mut out = DMatrix::zeros(dk, dk);
    for ki in 0..dk {
        for kj in 0..dk {
            let mut acc = C64::new(0.0, 0.0);
            for &t in &trace_off {
                acc += op.mat[(keep_off[ki] + t, keep_off[kj] + t)];
            }
            out[(ki, kj)] = acc;
        }
    }
    Ok(HermitianOp::from_matrix_unchecked(d, keep.len(), out))
}

/// `1^{⊗(i-1)} ⊗ h ⊗ 1^{⊗(N-i-1)}` for a two-site `h`, `1 ≤ i ≤ N-1`.
pub fn embed_bond(h: &HermitianOp, i: usize, n: usize) -> Result<HermitianOp> {
    if h.sites != 2 {
        return Err(Error::InvalidArgument(format!("bond operator on {} sites", h.sites)));
    }
    if i == 0 || i + 1 > n {
        return Err(Error::InvalidSite(format!("bond {i} on a {n}-site chain")));
    }
    embed_two_site(h, i, i + 1, n)
}

/// `h` acting on sites `(N, 1)`, first tensor factor on site `N`.
pub fn embed_bond_cyclic(h: &HermitianOp, n: usize) -> Result<HermitianOp> {
    if n < 2 {
        return Err(Error::InvalidSite(format!("cyclic bond on {n} sites")));
    }
    embed_two_site(h, n, 1, n)
}

/// Places the first tensor factor of `h` on site `a` and the second on site `b`.
pub fn embed_two_site(h: &HermitianOp, a: usize, b: usize, n: usize) -> Result<HermitianOp> {
    if h.sites != 2 {
        return Err(Error::InvalidArgument(format!("two-site operator expected, got {} sites", h.sites)));
    }
    if a == b || a == 0 || b == 0 || a > n || b > n {
        return Err(Error::InvalidSite(format!("sites ({a}, {b}) on a {n}-site chain")));
    }
    let d = h.local_dim;
    let dim = pow(d, n);
    let sa = pow(d, n - a);
    let sb = pow(d, n - b);
    let mut out = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let (ca, cb) = ((col / sa) % d, (col / sb) % d);
        let base = col - ca * sa - cb * sb;
        for ra in 0..d {
            for rb in 0..d {
                let v = h.mat[(ra * d + rb, ca * d + cb)];
                if v != C64::new(0.0, 0.0) {
                    out[(base + ra * sa + rb * sb, col)] = v;
                }
            }
        }
    }
    Ok(HermitianOp { local_dim: d, sites: n, mat: out })
}

/// Nearest PSD operator in Frobenius norm (negative eigenvalues clipped to zero).
pub fn psd_project(a: &HermitianOp) -> Result<HermitianOp> {
    let eig = hermitian_eig(a)?;
    let mat = eig.reconstruct_with(|x| x.max(0.0));
    Ok(HermitianOp::from_matrix_unchecked(a.local_dim, a.sites, mat))
}

/// Nearest density matrix in Frobenius norm: eigenvalues projected onto the simplex.
pub fn density_project(a: &HermitianOp) -> Result<DensityMatrix> {
    let eig = hermitian_eig(a)?;
    let shift = simplex_shift(&eig.values);
    let mat = eig.reconstruct_with(|x| (x - shift).max(0.0));
    Ok(DensityMatrix::new_unchecked(HermitianOp::from_matrix_unchecked(a.local_dim, a.sites, mat)))
}

/// Threshold `τ` with `Σ max(λ_i − τ, 0) = 1`.
fn simplex_shift(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut shift = 0.0;
    for (k, &v) in sorted.iter().enumerate() {
        cumsum += v;
        let t = (cumsum - 1.0) / (k + 1) as f64;
        if v - t > 0.0 {
            shift = t;
        }
    }
    shift
}

pub fn operator_norm(a: &HermitianOp) -> Result<f64> {
    let eig = hermitian_eig(a)?;
    Ok(eig.values.iter().fold(0.0_f64, |m, x| m.max(x.abs())))
}
