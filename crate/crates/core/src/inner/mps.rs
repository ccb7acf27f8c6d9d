use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::hermitian::{C64, DensityMatrix, HermitianOp};
use crate::{Error, Result};

/// Relative gap below which the leading transfer eigenvalue counts as degenerate.
pub const GAP_TOL: f64 = 1e-8;
const SCHUR_MAX_ITER: usize = 10_000;
const TRACE_FLOOR: f64 = 1e-14;

/// Translation-invariant matrix product state given by `d` bond matrices of size `D×D`.
#[derive(Clone, Debug, PartialEq)]
pub struct UniformMPS {
    tensors: Vec<DMatrix<C64>>,
}

impl UniformMPS {
    pub fn new(tensors: Vec<DMatrix<C64>>) -> Result<Self> {
        let Some(first) = tensors.first() else {
            return Err(Error::InvalidArgument("no tensors".into()));
        };
        let bond = first.nrows();
        if tensors.len() < 2 || bond == 0 || tensors.iter().any(|a| a.nrows() != bond || a.ncols() != bond) {
            return Err(Error::DimensionMismatch(format!("need d ≥ 2 square {bond}×{bond} matrices")));
        }
        if tensors.iter().any(|a| a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite())) {
            return Err(Error::InvalidArgument("non-finite tensor entry".into()));
        }
        if tensors.iter().all(|a| a.iter().all(|z| z.norm_sqr() == 0.0)) {
            return Err(Error::DegenerateTransfer("all tensors vanish".into()));
        }
        Ok(Self { tensors })
    }

    /// Unpacks `2 d D²` reals: for each tensor, entries in row-major order as `(re, im)`.
    pub fn from_params(d: usize, bond: usize, params: &[f64]) -> Result<Self> {
        if params.len() != 2 * d * bond * bond {
            return Err(Error::DimensionMismatch(format!("expected {} parameters, got {}", 2 * d * bond * bond, params.len())));
        }
        let tensors = params
            .chunks(2 * bond * bond)
            .map(|c| DMatrix::from_fn(bond, bond, |i, j| C64::new(c[2 * (i * bond + j)], c[2 * (i * bond + j) + 1])))
            .collect();
        Self::new(tensors)
    }

    pub fn to_params(&self) -> Vec<f64> {
        let bond = self.bond_dim();
        let mut out = Vec::with_capacity(2 * self.local_dim() * bond * bond);
        for a in &self.tensors {
            for i in 0..bond {
                for j in 0..bond {
                    out.push(a[(i, j)].re);
                    out.push(a[(i, j)].im);
                }
            }
        }
        out
    }

    pub fn local_dim(&self) -> usize {
        self.tensors.len()
    }

    pub fn bond_dim(&self) -> usize {
        self.tensors[0].nrows()
    }

    pub fn tensors(&self) -> &[DMatrix<C64>] {
        &self.tensors
    }

    /// Zero-padded copy with a larger bond dimension; describes the same state.
    pub fn embed(&self, bond: usize) -> Result<Self> {
        if bond < self.bond_dim() {
            return Err(Error::InvalidArgument(format!("cannot embed bond {} into {bond}", self.bond_dim())));
        }
        let old = self.bond_dim();
        let tensors = self
            .tensors
            .iter()
            .map(|a| DMatrix::from_fn(bond, bond, |i, j| if i < old && j < old { a[(i, j)] } else { C64::new(0.0, 0.0) }))
            .collect();
        Self::new(tensors)
    }

    /// `A_s ↦ G A_s G⁻¹`.
    pub fn gauge_transform(&self, g: &DMatrix<C64>) -> Result<Self> {
        let inv = g
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidArgument("gauge matrix is singular".into()))?;
        Self::new(self.tensors.iter().map(|a| g * a * &inv).collect())
    }

    /// `X ↦ Σ_s A_s X A_s†`.
    pub fn transfer(&self, x: &DMatrix<C64>) -> DMatrix<C64> {
        self.tensors.iter().map(|a| a * x * a.adjoint()).fold(DMatrix::zeros(x.nrows(), x.ncols()), |acc, t| acc + t)
    }

    /// `X ↦ Σ_s A_s† X A_s`.
    pub fn transfer_adjoint(&self, x: &DMatrix<C64>) -> DMatrix<C64> {
        self.tensors.iter().map(|a| a.adjoint() * x * a).fold(DMatrix::zeros(x.nrows(), x.ncols()), |acc, t| acc + t)
    }

    /// Matrix of [`Self::transfer`] acting on column-stacked `X`.
    fn transfer_matrix(&self) -> DMatrix<C64> {
        let n = self.bond_dim() * self.bond_dim();
        self.tensors.iter().fold(DMatrix::zeros(n, n), |acc, a| acc + a.conjugate().kronecker(a))
    }

    pub fn to_json(&self) -> String {
        let file = TensorFile {
            d: self.local_dim(),
            bond: self.bond_dim(),
            tensors: self
                .tensors
                .iter()
                .map(|a| a.row_iter().map(|r| r.iter().map(|z| [z.re, z.im]).collect()).collect())
                .collect(),
        };
        serde_json::to_string(&file).expect("serializing plain data")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: TensorFile = serde_json::from_str(text)?;
        if file.tensors.len() != file.d {
            return Err(Error::Parse(format!("expected {} tensors, got {}", file.d, file.tensors.len())));
        }
        let mut tensors = Vec::with_capacity(file.d);
        for t in &file.tensors {
            if t.len() != file.bond || t.iter().any(|r| r.len() != file.bond) {
                return Err(Error::Parse(format!("tensor is not {0}×{0}", file.bond)));
            }
            tensors.push(DMatrix::from_fn(file.bond, file.bond, |i, j| C64::new(t[i][j][0], t[i][j][1])));
        }
        Self::new(tensors)
    }
}

#[derive(Serialize, Deserialize)]
struct TensorFile {
    d: usize,
    #[serde(rename = "D")]
    bond: usize,
    tensors: Vec<Vec<Vec<[f64; 2]>>>,
}

/// Leading fixed points of the transfer map rescaled to unit spectral radius:
/// `Σ A_s r A_s† = λ r`, `Σ A_s† l A_s = λ l`, both PSD, `tr(l r) = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct FixedPointPair {
    pub l: DMatrix<C64>,
    pub r: DMatrix<C64>,
    pub lambda: f64,
}

impl FixedPointPair {
    /// Largest of the two fixed-point defects in Frobenius norm.
    pub fn residual(&self, mps: &UniformMPS) -> f64 {
        let right = (mps.transfer(&self.r) / C64::new(self.lambda, 0.0) - &self.r).norm();
        let left = (mps.transfer_adjoint(&self.l) / C64::new(self.lambda, 0.0) - &self.l).norm();
        right.max(left)
    }
}

fn column_stacked(v: &nalgebra::DVector<C64>, bond: usize) -> DMatrix<C64> {
    DMatrix::from_fn(bond, bond, |i, j| v[i + j * bond])
}

/// Hermitian PSD representative of a fixed point known up to a complex phase.
fn positive_representative(x: DMatrix<C64>) -> Result<DMatrix<C64>> {
    let tr = x.trace();
    if tr.norm() <= TRACE_FLOOR * x.norm().max(f64::MIN_POSITIVE) {
        return Err(Error::DegenerateTransfer("traceless leading eigenvector".into()));
    }
    let x = x * (tr.conj() / tr.norm());
    let x = (&x + x.adjoint()) * C64::new(0.5, 0.0);
    let eig = crate::hermitian::eig_matrix(x)?;
    Ok(eig.reconstruct_with(|v| v.max(0.0)))
}

/// Null vector of `M − λ I` from the smallest singular value.
fn null_vector(m: &DMatrix<C64>, lambda: f64) -> Result<nalgebra::DVector<C64>> {
    let n = m.nrows();
    let shifted = m - DMatrix::<C64>::identity(n, n) * C64::new(lambda, 0.0);
    let svd = shifted.svd(false, true);
    let v_t = svd.v_t.ok_or_else(|| Error::NoConvergence { routine: "svd", iterations: 0 })?;
    let (k, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty spectrum");
    Ok(v_t.row(k).adjoint())
}

/// Leading eigenvalue of the transfer map and its left and right eigenmatrices.
///
/// The spectrum comes from a Schur decomposition of the `D²×D²` transfer matrix; the
/// leading eigenvalue is the spectral radius, and it is rejected when another
/// eigenvalue lies within `gap_tol · λ` of it.
pub fn transfer_fixed_points(mps: &UniformMPS, gap_tol: f64) -> Result<FixedPointPair> {
    let bond = mps.bond_dim();
    let t = mps.transfer_matrix();
    let schur = t
        .clone()
        .try_schur(f64::EPSILON, SCHUR_MAX_ITER)
        .ok_or(Error::NoConvergence { routine: "schur", iterations: SCHUR_MAX_ITER })?;
    let spectrum: Vec<C64> = schur.unpack().1.diagonal().iter().copied().collect();
    let radius = spectrum.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::DegenerateTransfer("nilpotent transfer map".into()));
    }
    // the spectral radius of a positive map is itself an eigenvalue
    let (lead, _) = spectrum
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - C64::new(radius, 0.0)).norm().total_cmp(&(b.1 - C64::new(radius, 0.0)).norm()))
        .expect("non-empty spectrum");
    let lambda = radius;
    let gap = spectrum
        .iter()
        .enumerate()
        .filter(|(k, _)| *k != lead)
        .map(|(_, z)| (z - C64::new(lambda, 0.0)).norm())
        .fold(f64::INFINITY, f64::min);
    if gap < gap_tol * lambda {
        return Err(Error::DegenerateTransfer(format!("leading eigenvalue gap {gap:.3e}")));
    }

    let r = positive_representative(column_stacked(&null_vector(&t, lambda)?, bond))?;
    let l = positive_representative(column_stacked(&null_vector(&t.adjoint(), lambda)?, bond))?;
    let overlap = (&l * &r).trace().re;
    if !(overlap > TRACE_FLOOR * l.norm() * r.norm()) {
        return Err(Error::DegenerateTransfer(format!("fixed points nearly orthogonal, tr(lr) = {overlap:.3e}")));
    }
    let scale = overlap.sqrt();
    Ok(FixedPointPair { l: l / C64::new(scale, 0.0), r: r / C64::new(scale, 0.0), lambda })
}

/// `ρ[(s,t),(s',t')] = tr(l A_s A_t r (A_{s'} A_{t'})†)`, normalized to unit trace.
pub fn two_site_reduced_state(mps: &UniformMPS, fp: &FixedPointPair) -> Result<DensityMatrix> {
    let d = mps.local_dim();
    let a = mps.tensors();
    let pairs: Vec<DMatrix<C64>> = (0..d * d).map(|k| &a[k / d] * &a[k % d]).collect();
    let sandwiched: Vec<DMatrix<C64>> = pairs.iter().map(|m| &fp.l * m * &fp.r).collect();
    let mat = DMatrix::from_fn(d * d, d * d, |row, col| pairs[col].dotc(&sandwiched[row]));
    let tr = mat.trace().re;
    if !(tr > TRACE_FLOOR) {
        return Err(Error::DegenerateTransfer(format!("reduced state trace {tr:.3e}")));
    }
    let op = HermitianOp::new(d, 2, mat / C64::new(tr, 0.0))?;
    DensityMatrix::new(op)
}

/// Fixed points and two-site state in one call.
pub fn reduced_state(mps: &UniformMPS) -> Result<DensityMatrix> {
    two_site_reduced_state(mps, &transfer_fixed_points(mps, GAP_TOL)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian::partial_trace;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    pub(crate) fn random_mps(rng: &mut ChaCha8Rng, d: usize, bond: usize) -> UniformMPS {
        let params: Vec<f64> = (0..2 * d * bond * bond).map(|_| StandardNormal.sample(rng)).collect();
        UniformMPS::from_params(d, bond, &params).unwrap()
    }

    fn neel() -> UniformMPS {
        let a0 = DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)]);
        let a1 = DMatrix::from_row_slice(2, 2, &[c(0.0), c(0.0), c(1.0), c(0.0)]);
        UniformMPS::new(vec![a0, a1]).unwrap()
    }

    #[test]
    fn rejects_malformed() {
        assert!(UniformMPS::new(vec![]).is_err());
        assert!(UniformMPS::new(vec![DMatrix::zeros(2, 2), DMatrix::zeros(2, 2)]).is_err());
        assert!(UniformMPS::new(vec![DMatrix::zeros(2, 2), DMatrix::zeros(3, 3)]).is_err());
        assert!(UniformMPS::from_params(2, 2, &[1.0; 5]).is_err());
    }

    #[test]
    fn params_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = random_mps(&mut rng, 2, 3);
        assert_eq!(UniformMPS::from_params(2, 3, &m.to_params()).unwrap(), m);
        assert_eq!(UniformMPS::from_json(&m.to_json()).unwrap(), m);
    }

    #[test]
    fn scalar_tensors() {
        let m = UniformMPS::new(vec![DMatrix::from_element(1, 1, c(0.6)), DMatrix::from_element(1, 1, C64::new(0.0, 0.8))]).unwrap();
        let fp = transfer_fixed_points(&m, GAP_TOL).unwrap();
        assert!((fp.lambda - 1.0).abs() < 1e-14);
        assert!((fp.l[(0, 0)].re - 1.0).abs() < 1e-14 && (fp.r[(0, 0)].re - 1.0).abs() < 1e-14);
        // σ = |ψ⟩⟨ψ| with ψ = (0.6, 0.8i)
        let rho = two_site_reduced_state(&m, &fp).unwrap();
        let psi = [c(0.6), C64::new(0.0, 0.8)];
        for row in 0..4 {
            for col in 0..4 {
                let want = psi[row / 2] * psi[row % 2] * (psi[col / 2] * psi[col % 2]).conj();
                assert!((rho.op().matrix()[(row, col)] - want).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn product_basis_state() {
        let m = UniformMPS::new(vec![DMatrix::from_element(1, 1, c(1.0)), DMatrix::from_element(1, 1, c(0.0))]).unwrap();
        let rho = reduced_state(&m).unwrap();
        assert!((rho.op().matrix()[(0, 0)].re - 1.0).abs() < 1e-15);
        assert!(rho.op().matrix().iter().skip(1).all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn unital_case_has_identity_fixed_points() {
        // Pauli Kraus operators: the completely depolarizing channel
        let tensors = crate::hermitian::Pauli::ALL
            .iter()
            .map(|p| {
                let m = p.matrix();
                DMatrix::from_fn(2, 2, |i, j| m[i][j] * c(0.5))
            })
            .collect();
        let m = UniformMPS::new(tensors).unwrap();
        let fp = transfer_fixed_points(&m, GAP_TOL).unwrap();
        let target = DMatrix::<C64>::identity(2, 2) * c(0.5f64.sqrt());
        assert!((fp.lambda - 1.0).abs() < 1e-12);
        assert!((&fp.r - &target).norm() < 1e-12 && (&fp.l - &target).norm() < 1e-12);
    }

    #[test]
    fn neel_mixture() {
        let m = neel();
        let fp = transfer_fixed_points(&m, GAP_TOL).unwrap();
        assert!(fp.residual(&m) < 1e-12);
        let rho = two_site_reduced_state(&m, &fp).unwrap();
        let want = HermitianOp::from_real_diagonal(2, 2, &[0.0, 0.5, 0.5, 0.0]).unwrap();
        assert!(rho.op().sub(&want).unwrap().frobenius_norm() < 1e-14);
    }

    #[test]
    fn degenerate_leading_eigenvalue_rejected() {
        // block-diagonal copies of the same scalar tensor give a doubly degenerate map
        let a0 = DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(1.0)]);
        let a1 = DMatrix::from_row_slice(2, 2, &[c(0.5), c(0.0), c(0.0), c(0.5)]);
        let m = UniformMPS::new(vec![a0, a1]).unwrap();
        assert!(matches!(transfer_fixed_points(&m, GAP_TOL), Err(Error::DegenerateTransfer(_))));
    }

    #[test]
    fn random_fixed_points_match_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..5 {
            let m = random_mps(&mut rng, 2, 3);
            let fp = transfer_fixed_points(&m, GAP_TOL).unwrap();
            assert!(fp.residual(&m) < 1e-10);
            assert!(((&fp.l * &fp.r).trace().re - 1.0).abs() < 1e-10);
            // independent check: power iteration on the flattened 9×9 map
            let mut t = DMatrix::<C64>::zeros(9, 9);
            for a in m.tensors() {
                for (col, (p, q)) in (0..3).flat_map(|q| (0..3).map(move |p| (p, q))).enumerate() {
                    let mut e = DMatrix::<C64>::zeros(3, 3);
                    e[(p, q)] = c(1.0);
                    let img = a * e * a.adjoint();
                    for row in 0..9 {
                        t[(row, col)] += img[(row % 3, row / 3)];
                    }
                }
            }
            let mut v = nalgebra::DVector::from_element(9, c(1.0));
            let mut lam = 0.0;
            for _ in 0..2000 {
                let w = &t * &v;
                lam = w.norm() / v.norm();
                v = w.normalize();
            }
            assert!((lam - fp.lambda).abs() < 1e-9 * fp.lambda, "{lam} vs {}", fp.lambda);
            let oracle = DMatrix::from_fn(3, 3, |i, j| v[i + 3 * j]);
            let ratio = fp.r[(0, 0)] / oracle[(0, 0)];
            assert!((&fp.r - oracle * ratio).norm() < 1e-8);
        }
    }

    #[test]
    fn one_site_marginals_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for bond in 1..=4 {
            let rho = reduced_state(&random_mps(&mut rng, 2, bond)).unwrap();
            let a = partial_trace(rho.op(), &[1]).unwrap();
            let b = partial_trace(rho.op(), &[2]).unwrap();
            assert!(a.sub(&b).unwrap().frobenius_norm() < 1e-9);
        }
    }

    #[test]
    fn gauge_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let m = random_mps(&mut rng, 2, 3);
            let g = DMatrix::from_fn(3, 3, |_, _| C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)));
            let g = g + DMatrix::<C64>::identity(3, 3) * c(3.0);
            let a = reduced_state(&m).unwrap();
            let b = reduced_state(&m.gauge_transform(&g).unwrap()).unwrap();
            assert!(a.op().sub(b.op()).unwrap().frobenius_norm() < 1e-10);
        }
    }

    #[test]
    fn embedding_preserves_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let m = random_mps(&mut rng, 2, 2);
        let a = reduced_state(&m).unwrap();
        let b = reduced_state(&m.embed(4).unwrap()).unwrap();
        assert!(a.op().sub(b.op()).unwrap().frobenius_norm() < 1e-12);
        assert!(m.embed(1).is_err());
    }
}
