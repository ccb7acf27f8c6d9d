use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::hermitian::{C64, DensityMatrix, HermitianOp, Pauli, PauliString, PauliTwoBodyHamiltonian};
use crate::{Error, Result};

/// Largest supported extension: `N + 1 ≤ 8` qubits.
pub const MAX_LEVEL: usize = 7;
const RANK_RTOL: f64 = 1e-10;
const POLISH_STEPS: usize = 12;

#[derive(Clone, Debug, PartialEq)]
pub enum ConstraintMode {
    /// Every successive two-site marginal equals the given state.
    Pinned(DensityMatrix),
    /// Successive two-site marginals agree with each other.
    Free,
}

/// Affine subspace of unit-trace Hermitian operators on `N + 1` qubits whose successive
/// two-site marginals are all equal (free) or all equal to a fixed state (pinned).
///
/// Only the Pauli coordinates touching a single window enter the constraints, so the
/// projection acts on that coordinate block and leaves every other coordinate alone.
/// Coordinates use the orthonormal basis `P / 2^{(N+1)/2}`.
#[derive(Clone, Debug)]
pub struct MarginalConstraintSystem {
    n: usize,
    mode: ConstraintMode,
    strings: Vec<PauliString>,
    windows: Vec<[[usize; 4]; 4]>,
    scale: f64,
    constraint: DMatrix<f64>,
    rhs: DVector<f64>,
    particular: DVector<f64>,
    projector: DMatrix<f64>,
}

impl MarginalConstraintSystem {
    pub fn new(n: usize, mode: ConstraintMode) -> Result<Self> {
        if !(2..=MAX_LEVEL).contains(&n) {
            return Err(Error::InvalidArgument(format!("level N = {n} outside 2..={MAX_LEVEL}")));
        }
        if let ConstraintMode::Pinned(rho) = &mode {
            if rho.local_dim() != 2 || rho.sites() != 2 {
                return Err(Error::InvalidArgument(format!(
                    "pinned state must be a two-qubit state, got d={} on {} sites",
                    rho.local_dim(),
                    rho.sites()
                )));
            }
        }
        let sites = n + 1;
        let mut strings = vec![PauliString::new(vec![Pauli::I; sites])];
        let mut single = vec![[0usize; 4]; sites];
        for (j, slot) in single.iter_mut().enumerate() {
            for a in &Pauli::ALL[1..] {
                let mut ops = vec![Pauli::I; sites];
                ops[j] = *a;
                slot[a.index()] = strings.len();
                strings.push(PauliString::new(ops));
            }
        }
        let mut windows = Vec::with_capacity(n);
        for i in 0..n {
            let mut w = [[0usize; 4]; 4];
            for a in Pauli::ALL {
                for b in Pauli::ALL {
                    w[a.index()][b.index()] = match (a, b) {
                        (Pauli::I, Pauli::I) => 0,
                        (_, Pauli::I) => single[i][a.index()],
                        (Pauli::I, _) => single[i + 1][b.index()],
                        _ => {
                            strings.push(PauliString::two_site(sites, i + 1, a, i + 2, b));
                            strings.len() - 1
                        }
                    };
                }
            }
            windows.push(w);
        }

        let scale = 2f64.powf(sites as f64 / 2.0);
        // marginal coordinate in the two-site orthonormal basis σ_a⊗σ_b/2
        let kappa = scale / 2.0;
        let cols = strings.len();
        let mut rows: Vec<(Vec<(usize, f64)>, f64)> = Vec::new();
        match &mode {
            ConstraintMode::Pinned(rho) => {
                for w in &windows {
                    for a in Pauli::ALL {
                        for b in Pauli::ALL {
                            let target = PauliString::new(vec![a, b]).trace_with(rho.op().matrix()) / 2.0;
                            rows.push((vec![(w[a.index()][b.index()], kappa)], target));
                        }
                    }
                }
            }
            ConstraintMode::Free => {
                rows.push((vec![(0, scale)], 1.0));
                for pair in windows.windows(2) {
                    for a in 0..4 {
                        for b in 0..4 {
                            let (p, q) = (pair[0][a][b], pair[1][a][b]);
                            if p != q {
                                rows.push((vec![(p, kappa), (q, -kappa)], 0.0));
                            }
                        }
                    }
                }
            }
        }
        let mut constraint = DMatrix::zeros(rows.len(), cols);
        let mut rhs = DVector::zeros(rows.len());
        for (r, (entries, b)) in rows.into_iter().enumerate() {
            for (c, v) in entries {
                constraint[(r, c)] += v;
            }
            rhs[r] = b;
        }
        // null space and least-norm solution from the Gram matrix; its spectrum is a few
        // well-separated multiples of κ², so squaring the condition number is harmless
        let gram = constraint.transpose() * &constraint;
        let eig = SymmetricEigen::new(gram);
        let cutoff = RANK_RTOL * eig.eigenvalues.amax();
        let lt_b = constraint.transpose() * &rhs;
        let mut particular = DVector::zeros(cols);
        let mut projector = DMatrix::zeros(cols, cols);
        for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
            let v = eig.eigenvectors.column(k);
            if lambda > cutoff {
                particular.axpy(v.dot(&lt_b) / lambda, &v, 1.0);
            } else {
                projector.ger(1.0, &v, &v, 1.0);
            }
        }
        Ok(Self { n, mode, strings, windows, scale, constraint, rhs, particular, projector })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sites(&self) -> usize {
        self.n + 1
    }

    pub fn dim(&self) -> usize {
        1 << self.sites()
    }

    pub fn mode(&self) -> &ConstraintMode {
        &self.mode
    }

    pub fn num_coordinates(&self) -> usize {
        self.strings.len()
    }

    pub fn coordinates(&self, x: &HermitianOp) -> DVector<f64> {
        self.coord_vector(x.matrix())
    }

    fn with_coordinates(&self, x: &HermitianOp, from: &DVector<f64>, to: &DVector<f64>) -> HermitianOp {
        let mut m = x.matrix().clone();
        for (k, p) in self.strings.iter().enumerate() {
            let delta = to[k] - from[k];
            if delta != 0.0 {
                p.add_scaled_to(&mut m, delta / self.scale);
            }
        }
        HermitianOp::from_matrix_unchecked(2, self.sites(), m)
    }

    /// Orthogonal projection onto the affine subspace.
    pub fn project(&self, x: &HermitianOp) -> HermitianOp {
        let c = self.coordinates(x);
        let t = &self.particular + &self.projector * &c;
        self.with_coordinates(x, &c, &t)
    }

    /// Projection onto the affine subspace intersected with `{⟨w, x⟩ ≤ e}`; `w_dir` must
    /// be [`Self::direction`] of `w`.
    pub(crate) fn project_below(&self, x: &HermitianOp, w: &DVector<f64>, w_dir: &DVector<f64>, e: f64) -> HermitianOp {
        let c = self.coordinates(x);
        let mut t = &self.particular + &self.projector * &c;
        let excess = w.dot(&t) - e;
        if excess > 0.0 {
            t.axpy(-excess / w_dir.norm_squared(), w_dir, 1.0);
        }
        self.with_coordinates(x, &c, &t)
    }

    /// Gauss–Newton on a factored operator `X = W W†` until `X` satisfies the
    /// constraints; positivity holds by construction. Returns `None` if the residual
    /// does not drop below `tol` within a few steps.
    pub(crate) fn polish_factor(&self, mut w: DMatrix<C64>, tol: f64) -> Option<HermitianOp> {
        let (dim, r) = (w.nrows(), w.ncols());
        let mut last = f64::INFINITY;
        for _ in 0..POLISH_STEPS {
            let x = &w * w.adjoint();
            let defect = &self.constraint * self.coord_vector(&x) - &self.rhs;
            let norm = defect.norm();
            if norm <= tol {
                return Some(HermitianOp::from_matrix_unchecked(2, self.sites(), (&x + x.adjoint()) * C64::new(0.5, 0.0)));
            }
            if !(norm < last) {
                return None;
            }
            last = norm;
            // d coord_s / d Re W_ij = 2 Re (P_s W)_ij / scale, and Im likewise
            let mut jc = DMatrix::zeros(self.strings.len(), 2 * dim * r);
            for (s, p) in self.strings.iter().enumerate() {
                let g = p.apply_to(&w);
                for (k, z) in g.iter().enumerate() {
                    jc[(s, 2 * k)] = 2.0 * z.re / self.scale;
                    jc[(s, 2 * k + 1)] = 2.0 * z.im / self.scale;
                }
            }
            let jac = &self.constraint * jc;
            let svd = jac.svd(true, true);
            let eps = RANK_RTOL * svd.singular_values.max();
            let step = svd.solve(&(-defect), eps).ok()?;
            for (k, z) in w.iter_mut().enumerate() {
                *z += C64::new(step[2 * k], step[2 * k + 1]);
            }
        }
        None
    }

    fn coord_vector(&self, m: &DMatrix<C64>) -> DVector<f64> {
        DVector::from_iterator(self.strings.len(), self.strings.iter().map(|p| p.trace_with(m) / self.scale))
    }

    /// Component of a coordinate vector parallel to the subspace.
    pub fn direction(&self, w: &DVector<f64>) -> DVector<f64> {
        &self.projector * w
    }

    /// Euclidean norm of the constraint violation, equal to the Frobenius norm of the
    /// stacked marginal defects.
    pub fn residual(&self, x: &HermitianOp) -> f64 {
        (&self.constraint * self.coordinates(x) - &self.rhs).norm()
    }

    /// Coordinates `w` with `⟨w, x⟩ = tr(h ρ₁₂)` for the marginal on the first window.
    pub fn energy_weights(&self, h: &PauliTwoBodyHamiltonian) -> DVector<f64> {
        let mut w = DVector::zeros(self.strings.len());
        for (a, b, c) in h.terms() {
            w[self.windows[0][a.index()][b.index()]] += c * self.scale;
        }
        w
    }
}
