//! Lanczos ground-state search with full reorthogonalization and matrix-free chain
//! Hamiltonians.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::hermitian::{C64, HermitianOp, PauliTwoBodyHamiltonian, pauli_to_matrix, pow};
use crate::{Error, Exec, Result};

const RITZ_CHECK_EVERY: usize = 5;
const APPLY_CHUNK: usize = 1 << 10;

#[derive(Clone, Debug)]
pub struct LanczosOptions {
    pub max_iter: usize,
    /// Relative residual target for the lowest Ritz pair.
    pub tol: f64,
    pub seed: u64,
    pub max_restarts: usize,
    pub exec: Exec,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self { max_iter: 300, tol: 1e-12, seed: 0x5eed, max_restarts: 3, exec: Exec::Parallel }
    }
}

#[derive(Clone, Debug)]
pub struct GroundState {
    /// Rayleigh quotient of the returned vector, an upper bound on `λ_min`.
    pub energy: f64,
    /// `‖A v − energy · v‖` for the returned unit vector.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub vector: Vec<C64>,
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn axpy(alpha: C64, x: &[C64], y: &mut [C64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

fn random_unit(dim: usize, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<C64> = (0..dim)
        .map(|_| C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
        .collect();
    let n = norm(&v);
    v.iter_mut().for_each(|z| *z /= n);
    v
}

/// Lowest eigenpair of the tridiagonal matrix with diagonal `alpha` and off-diagonal `beta`.
fn lowest_ritz(alpha: &[f64], beta: &[f64]) -> (f64, Vec<f64>) {
    let k = alpha.len();
    let t = DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(t);
    let (imin, theta) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, &x)| (i, x))
        .expect("nonempty tridiagonal");
    (theta, eig.eigenvectors.column(imin).iter().copied().collect())
}

/// Lowest eigenvalue of the Hermitian operator `apply` on `C^dim`.
///
/// The starting vector is drawn from `opts.seed`, so results are reproducible. A
/// breakdown that leaves a large residual restarts from the next seed.
pub fn lanczos_ground<F>(apply: F, dim: usize, opts: &LanczosOptions) -> Result<GroundState>
where
    F: Fn(&[C64], &mut [C64]),
{
    if dim < 2 {
        return Err(Error::InvalidArgument(format!("Lanczos needs dim >= 2, got {dim}")));
    }
    let mut last = None;
    for attempt in 0..=opts.max_restarts {
        let seed = opts.seed.wrapping_add(attempt as u64);
        let (gs, broke_down) = lanczos_attempt(&apply, dim, opts, seed);
        if !(broke_down && !gs.converged) {
            return Ok(gs);
        }
        last = Some(gs);
    }
    last.ok_or(Error::NoConvergence { routine: "lanczos", iterations: opts.max_iter })
}

fn lanczos_attempt<F>(apply: &F, dim: usize, opts: &LanczosOptions, seed: u64) -> (GroundState, bool)
where
    F: Fn(&[C64], &mut [C64]),
{
    let steps = opts.max_iter.min(dim).max(1);
    let mut basis: Vec<Vec<C64>> = vec![random_unit(dim, seed)];
    let mut alpha = Vec::with_capacity(steps);
    let mut beta: Vec<f64> = Vec::with_capacity(steps);
    let mut w = vec![C64::new(0.0, 0.0); dim];
    let mut broke_down = false;
    let mut ritz = (0.0, vec![1.0]);

    for j in 0..steps {
        apply(&basis[j], &mut w);
        let a = dot(&basis[j], &w).re;
        alpha.push(a);
        axpy(C64::new(-a, 0.0), &basis[j], &mut w);
        if j > 0 {
            axpy(C64::new(-beta[j - 1], 0.0), &basis[j - 1], &mut w);
        }
        for _ in 0..2 {
            for v in &basis {
                let c = dot(v, &w);
                axpy(-c, v, &mut w);
            }
        }
        let b = norm(&w);
        let scale = a.abs() + beta.last().copied().unwrap_or(0.0) + f64::MIN_POSITIVE;
        broke_down = b <= 1e-12 * scale;
        let last_step = j + 1 == steps;
        if broke_down || last_step || (j + 1) % RITZ_CHECK_EVERY == 0 {
            ritz = lowest_ritz(&alpha, &beta);
            let estimate = b * ritz.1.last().unwrap().abs();
            if broke_down || last_step || estimate <= opts.tol * ritz.0.abs().max(1.0) {
                break;
            }
        }
        beta.push(b);
        basis.push(w.iter().map(|z| z / b).collect());
    }

    let k = ritz.1.len();
    let mut x = vec![C64::new(0.0, 0.0); dim];
    for (yi, v) in ritz.1.iter().zip(&basis[..k]) {
        axpy(C64::new(*yi, 0.0), v, &mut x);
    }
    let nx = norm(&x);
    x.iter_mut().for_each(|z| *z /= nx);
    apply(&x, &mut w);
    let energy = dot(&x, &w).re;
    axpy(C64::new(-energy, 0.0), &x, &mut w);
    let residual = norm(&w);
    let converged = residual <= 1e3 * opts.tol * energy.abs().max(1.0) || (broke_down && residual <= 1e-8 * energy.abs().max(1.0));
    (GroundState { energy, residual, iterations: k, converged, vector: x }, broke_down)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    Open,
    Periodic,
}

/// `Σ_bonds h_{i,i+1}` on `n` sites, applied without storing the matrix.
#[derive(Clone, Debug)]
pub struct ChainOperator {
    n: usize,
    d: usize,
    strides: Vec<usize>,
    bonds: Vec<(usize, usize)>,
    /// Nonzero entries of each row of `h`.
    rows: Vec<Vec<(usize, C64)>>,
}

impl ChainOperator {
    pub fn new(h: &HermitianOp, n: usize, boundary: Boundary) -> Result<Self> {
        if h.sites() != 2 {
            return Err(Error::InvalidArgument(format!("bond operator on {} sites", h.sites())));
        }
        if n < 2 || (boundary == Boundary::Periodic && n < 3) {
            return Err(Error::InvalidArgument(format!("{n} sites is too short for a {boundary:?} chain")));
        }
        let d = h.local_dim();
        let strides = (0..n).map(|k| pow(d, n - 1 - k)).collect();
        let mut bonds: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
        if boundary == Boundary::Periodic {
            bonds.push((n - 1, 0));
        }
        let rows = (0..d * d)
            .map(|r| {
                (0..d * d)
                    .filter_map(|c| {
                        let v = h.matrix()[(r, c)];
                        (v != C64::new(0.0, 0.0)).then_some((c, v))
                    })
                    .collect()
            })
            .collect();
        Ok(Self { n, d, strides, bonds, rows })
    }

    pub fn from_pauli(h: &PauliTwoBodyHamiltonian, n: usize, boundary: Boundary) -> Result<Self> {
        Self::new(&pauli_to_matrix(h), n, boundary)
    }

    pub fn sites(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        pow(self.d, self.n)
    }

    /// `out = H v`; every output entry is gathered independently.
    pub fn apply(&self, v: &[C64], out: &mut [C64], exec: Exec) {
        let d = self.d;
        exec.fill_chunks(out, APPLY_CHUNK, |offset, chunk| {
            for (i, o) in chunk.iter_mut().enumerate() {
                let k = offset + i;
                let mut acc = C64::new(0.0, 0.0);
                for &(p, q) in &self.bonds {
                    let (sp, sq) = (self.strides[p], self.strides[q]);
                    let (dp, dq) = ((k / sp) % d, (k / sq) % d);
                    let base = k - dp * sp - dq * sq;
                    for &(c, h) in &self.rows[dp * d + dq] {
                        acc += h * v[base + (c / d) * sp + (c % d) * sq];
                    }
                }
                *o = acc;
            }
        });
    }

    pub fn ground_state(&self, opts: &LanczosOptions) -> Result<GroundState> {
        lanczos_ground(|v, out| self.apply(v, out, opts.exec), self.dim(), opts)
    }
}
