use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use super::{C64, HermitianOp};
use crate::{Error, Result};

const PAULI_IMAG_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn matrix(self) -> [[C64; 2]; 2] {
        let o = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        match self {
            Pauli::I => [[one, o], [o, one]],
            Pauli::X => [[o, one], [one, o]],
            Pauli::Y => [[o, -i], [i, o]],
            Pauli::Z => [[one, o], [o, -one]],
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Pauli::I => "I",
            Pauli::X => "X",
            Pauli::Y => "Y",
            Pauli::Z => "Z",
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Pauli {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "I" | "i" => Ok(Pauli::I),
            "X" | "x" => Ok(Pauli::X),
            "Y" | "y" => Ok(Pauli::Y),
            "Z" | "z" => Ok(Pauli::Z),
            other => Err(Error::Parse(format!("unknown Pauli label {other:?}"))),
        }
    }
}

/// Real coefficients `c_ab` of `h = Σ c_ab σ_a ⊗ σ_b` over `{I,X,Y,Z}²`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PauliTwoBodyHamiltonian {
    coeffs: [[f64; 4]; 4],
}

impl PauliTwoBodyHamiltonian {
    pub fn new(coeffs: [[f64; 4]; 4]) -> Self {
        Self { coeffs }
    }

    /// Sums repeated terms.
    pub fn from_terms(terms: impl IntoIterator<Item = (Pauli, Pauli, f64)>) -> Self {
        let mut coeffs = [[0.0; 4]; 4];
        for (a, b, c) in terms {
            coeffs[a.index()][b.index()] += c;
        }
        Self { coeffs }
    }

    pub fn zz() -> Self {
        Self::from_terms([(Pauli::Z, Pauli::Z, 1.0)])
    }

    /// `XX + YY + ZZ`.
    pub fn heisenberg() -> Self {
        Self::from_terms([(Pauli::X, Pauli::X, 1.0), (Pauli::Y, Pauli::Y, 1.0), (Pauli::Z, Pauli::Z, 1.0)])
    }

    pub fn coeff(&self, a: Pauli, b: Pauli) -> f64 {
        self.coeffs[a.index()][b.index()]
    }

    pub fn coeffs(&self) -> &[[f64; 4]; 4] {
        &self.coeffs
    }

    /// Nonzero terms in `(a, b)` lexicographic order.
    pub fn terms(&self) -> Vec<(Pauli, Pauli, f64)> {
        let mut out = Vec::new();
        for a in Pauli::ALL {
            for b in Pauli::ALL {
                let c = self.coeff(a, b);
                if c != 0.0 {
                    out.push((a, b, c));
                }
            }
        }
        out
    }

    /// True when every term has an even number of `Y` factors (real matrix form).
    pub fn is_real(&self) -> bool {
        self.terms()
            .iter()
            .all(|(a, b, _)| ((*a == Pauli::Y) as u8 + (*b == Pauli::Y) as u8) % 2 == 0)
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut coeffs = self.coeffs;
        coeffs.iter_mut().flatten().for_each(|c| *c *= s);
        Self { coeffs }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .flatten()
            .zip(other.coeffs.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

pub fn pauli_to_matrix(h: &PauliTwoBodyHamiltonian) -> HermitianOp {
    let mut mat = DMatrix::zeros(4, 4);
    for (a, b, c) in h.terms() {
        let (ma, mb) = (a.matrix(), b.matrix());
        for r in 0..4 {
            for col in 0..4 {
                mat[(r, col)] += ma[r / 2][col / 2] * mb[r % 2][col % 2] * c;
            }
        }
    }
    HermitianOp::from_matrix_unchecked(2, 2, mat)
}

/// `c_ab = tr(A σ_a⊗σ_b)/4`.
pub fn matrix_to_pauli(a: &HermitianOp) -> Result<PauliTwoBodyHamiltonian> {
    if a.local_dim() != 2 || a.sites() != 2 {
        return Err(Error::InvalidArgument(format!(
            "Pauli table needs a two-qubit operator, got {} sites of dimension {}",
            a.sites(),
            a.local_dim()
        )));
    }
    matrix_to_pauli_raw(a.matrix())
}

/// Like [`matrix_to_pauli`] on an arbitrary 4×4 matrix; rejects imaginary coefficients.
pub fn matrix_to_pauli_raw(m: &DMatrix<C64>) -> Result<PauliTwoBodyHamiltonian> {
    if m.nrows() != 4 || m.ncols() != 4 {
        return Err(Error::DimensionMismatch(format!("{}x{} is not 4x4", m.nrows(), m.ncols())));
    }
    let mut coeffs = [[0.0; 4]; 4];
    for a in Pauli::ALL {
        for b in Pauli::ALL {
            let (ma, mb) = (a.matrix(), b.matrix());
            let mut tr = C64::new(0.0, 0.0);
            for r in 0..4 {
                for col in 0..4 {
                    tr += m[(r, col)] * ma[col / 2][r / 2] * mb[col % 2][r % 2];
                }
            }
            let c = tr / 4.0;
            if c.im.abs() > PAULI_IMAG_TOL {
                return Err(Error::NotHermitian(c.im.abs()));
            }
            coeffs[a.index()][b.index()] = c.re;
        }
    }
    Ok(PauliTwoBodyHamiltonian { coeffs })
}

/// Tensor product of Pauli matrices on `n` qubits, stored as bit masks.
///
/// `P|k⟩ = phase(k) |k ⊕ flip⟩`; site 1 is the most significant bit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PauliString {
    ops: Vec<Pauli>,
    flip: usize,
    sign_mask: usize,
    y_count: usize,
}

impl PauliString {
    pub fn new(ops: Vec<Pauli>) -> Self {
        let n = ops.len();
        let (mut flip, mut sign_mask, mut y_count) = (0, 0, 0);
        for (k, op) in ops.iter().enumerate() {
            let bit = 1usize << (n - 1 - k);
            match op {
                Pauli::I => {}
                Pauli::X => flip |= bit,
                Pauli::Y => {
                    flip |= bit;
                    sign_mask |= bit;
                    y_count += 1;
                }
                Pauli::Z => sign_mask |= bit,
            }
        }
        Self { ops, flip, sign_mask, y_count }
    }

    /// Identity everywhere except `op_a` on site `a` and `op_b` on site `b` (1-based).
    pub fn two_site(n: usize, a: usize, op_a: Pauli, b: usize, op_b: Pauli) -> Self {
        let mut ops = vec![Pauli::I; n];
        ops[a - 1] = op_a;
        ops[b - 1] = op_b;
        Self::new(ops)
    }

    pub fn ops(&self) -> &[Pauli] {
        &self.ops
    }

    fn phase(&self, k: usize) -> C64 {
        let base = match self.y_count % 4 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        };
        if (k & self.sign_mask).count_ones() % 2 == 1 { -base } else { base }
    }

    /// `tr(X P)`, real for Hermitian `X`.
    pub fn trace_with(&self, x: &DMatrix<C64>) -> f64 {
        (0..x.nrows())
            .map(|k| (x[(k, k ^ self.flip)] * self.phase(k)).re)
            .sum()
    }

    /// `P W` for a matrix `W` with one row per basis state.
    pub fn apply_to(&self, w: &DMatrix<C64>) -> DMatrix<C64> {
        let mut out = DMatrix::zeros(w.nrows(), w.ncols());
        for k in 0..w.nrows() {
            let ph = self.phase(k);
            for j in 0..w.ncols() {
                out[(k ^ self.flip, j)] = ph * w[(k, j)];
            }
        }
        out
    }

    /// `X += c P`.
    pub fn add_scaled_to(&self, x: &mut DMatrix<C64>, c: f64) {
        for k in 0..x.nrows() {
            x[(k ^ self.flip, k)] += self.phase(k) * c;
        }
    }
}
