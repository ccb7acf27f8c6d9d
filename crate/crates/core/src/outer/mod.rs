//! Outer approximation of the set of two-site reduced states of translation-invariant
//! chains: states admitting an `(N+1)`-site extension whose successive two-site marginals
//! all coincide, and lower bounds on the energy density derived from finite chains.

mod constraints;
mod dykstra;

pub use constraints::{ConstraintMode, MAX_LEVEL, MarginalConstraintSystem};
pub use dykstra::{DykstraOptions, DykstraOutcome, DykstraStatus};

use nalgebra::DMatrix;
use serde::Serialize;

use crate::hermitian::{DensityMatrix, HermitianOp, PauliTwoBodyHamiltonian, hermitian_eig, operator_norm, partial_trace, pauli_to_matrix};
use crate::lanczos::{Boundary, ChainOperator, LanczosOptions};
use crate::{Error, Result};

/// Largest chain handled by exact diagonalization.
pub const MAX_CHAIN_SITES: usize = 16;
pub const RELAXATION_STEPS: usize = 20;
/// Rank cap for the factored polish of a near-feasible membership iterate.
const MAX_FACTOR_RANK: usize = 16;
/// The polish runs on every this-many-th near-feasible check.
const POLISH_EVERY: usize = 5;

/// `Σ_{i,j} ‖ρ_{i,i+1} − ρ_{j,j+1}‖_F` over ordered pairs of successive two-site marginals.
pub fn marginal_mismatch(state: &DensityMatrix) -> Result<f64> {
    let m = state.sites();
    if m < 3 {
        return Err(Error::InvalidArgument(format!("mismatch needs at least 3 sites, got {m}")));
    }
    let marginals: Vec<HermitianOp> = (1..m).map(|i| partial_trace(state.op(), &[i, i + 1])).collect::<Result<_>>()?;
    let mut total = 0.0;
    for (i, a) in marginals.iter().enumerate() {
        for b in &marginals[i + 1..] {
            total += 2.0 * a.sub(b)?.frobenius_norm();
        }
    }
    Ok(total)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MembershipStatus {
    Member,
    NonMember,
    Undecided,
}

#[derive(Clone, Debug)]
pub struct MembershipVerdict {
    pub status: MembershipStatus,
    pub witness: Option<DensityMatrix>,
    pub distance_estimate: f64,
    pub iterations: usize,
}

/// Decides whether `rho` has an `(N+1)`-site extension with every successive two-site
/// marginal equal to `rho`. A `NonMember` verdict is numerical, not a certificate.
pub fn membership(rho: &DensityMatrix, n: usize, opts: &DykstraOptions) -> Result<MembershipVerdict> {
    if rho.local_dim() != 2 || rho.sites() != 2 {
        return Err(Error::InvalidArgument("membership takes a two-qubit state".into()));
    }
    if !(2..=MAX_LEVEL).contains(&n) {
        return Err(Error::InvalidArgument(format!("level N = {n} outside 2..={MAX_LEVEL}")));
    }
    let left = partial_trace(rho.op(), &[1])?;
    let right = partial_trace(rho.op(), &[2])?;
    let gap = left.sub(&right)?.frobenius_norm();
    if gap > opts.tol_feas {
        return Ok(MembershipVerdict { status: MembershipStatus::NonMember, witness: None, distance_estimate: gap, iterations: 0 });
    }

    let sys = MarginalConstraintSystem::new(n, ConstraintMode::Pinned(rho.clone()))?;
    let start = HermitianOp::identity(2, n + 1).scaled(1.0 / sys.dim() as f64);
    let verified = |c: &DensityMatrix| sys.residual(c.op()) <= opts.tol_feas && marginal_mismatch(c).is_ok_and(|f| f <= opts.tol_feas);
    let calls = std::cell::Cell::new(0usize);
    let accept = |c: &DensityMatrix, k: &HermitianOp| {
        if verified(c) {
            return Some(c.clone());
        }
        calls.set(calls.get() + 1);
        if calls.get() % POLISH_EVERY != 1 {
            return None;
        }
        // Thin feasible sets leave the iterates close but slow to settle. A few
        // Gauss–Newton steps on a factor of the subspace iterate usually finish the job.
        let eig = hermitian_eig(k).ok()?;
        let keep: Vec<usize> = (0..eig.values.len()).rev().filter(|&i| eig.values[i] > 0.0).take(MAX_FACTOR_RANK).collect();
        let w = DMatrix::from_fn(sys.dim(), keep.len(), |r, j| eig.vectors[(r, keep[j])] * eig.values[keep[j]].sqrt());
        let x = sys.polish_factor(w, 0.1 * opts.tol_feas)?;
        DensityMatrix::new(x).ok().filter(|d| verified(d))
    };
    let out = dykstra::dykstra(start, |x| sys.project(x), accept, opts, 0.0)?;
    let status = match out.status {
        DykstraStatus::Feasible => MembershipStatus::Member,
        DykstraStatus::Infeasible => MembershipStatus::NonMember,
        DykstraStatus::Undecided => MembershipStatus::Undecided,
    };
    let witness = (status == MembershipStatus::Member).then_some(out.iterate);
    Ok(MembershipVerdict { status, witness, distance_estimate: out.distance, iterations: out.iterations })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMethod {
    OpenChain,
    Ring,
    MarginalRelaxation,
}

impl BoundMethod {
    pub fn name(self) -> &'static str {
        match self {
            BoundMethod::OpenChain => "open_chain",
            BoundMethod::Ring => "ring",
            BoundMethod::MarginalRelaxation => "marginal_relaxation",
        }
    }
}

/// Lower bound `value − slack` on the energy per bond.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LowerBoundCertificate {
    pub value: f64,
    pub method: BoundMethod,
    pub n: usize,
    pub slack: f64,
}

impl LowerBoundCertificate {
    pub fn certified(&self) -> f64 {
        self.value - self.slack
    }
}

fn check_chain(n: usize) -> Result<()> {
    if !(3..=MAX_CHAIN_SITES).contains(&n) {
        return Err(Error::InvalidArgument(format!("chain length {n} outside 3..={MAX_CHAIN_SITES}")));
    }
    Ok(())
}

/// `λ_min(Σ_{i<N} h_{i,i+1}) / (N − 1)`.
pub fn open_chain_lower_bound(h: &PauliTwoBodyHamiltonian, n: usize, opts: &LanczosOptions) -> Result<LowerBoundCertificate> {
    check_chain(n)?;
    let gs = ChainOperator::from_pauli(h, n, Boundary::Open)?.ground_state(opts)?;
    let bonds = (n - 1) as f64;
    Ok(LowerBoundCertificate { value: gs.energy / bonds, method: BoundMethod::OpenChain, n, slack: gs.residual / bonds })
}

/// `(λ_min(H_ring) − ‖h‖) / (N − 1)`: dropping the closing bond costs at most `‖h‖`.
pub fn ring_lower_bound(h: &PauliTwoBodyHamiltonian, n: usize, opts: &LanczosOptions) -> Result<LowerBoundCertificate> {
    check_chain(n)?;
    let gs = ChainOperator::from_pauli(h, n, Boundary::Periodic)?.ground_state(opts)?;
    let norm = operator_norm(&pauli_to_matrix(h))?;
    let bonds = (n - 1) as f64;
    Ok(LowerBoundCertificate { value: (gs.energy - norm) / bonds, method: BoundMethod::Ring, n, slack: gs.residual / bonds })
}

/// Minimum of `tr(h ρ₁₂)` over the level-`N` outer relaxation, located by bisection on
/// the energy with an emptiness test of `relaxation ∩ {tr(h ρ₁₂) ≤ e}` at each step.
///
/// Only energies found empty raise the bound; undecided steps lower the upper bracket,
/// so the result errs downwards. `tol` is the energy resolution of the emptiness test.
/// The levels below `n` are solved first and seed the bracket, see
/// [`marginal_relaxation_hierarchy`].
pub fn marginal_relaxation_bound(h: &PauliTwoBodyHamiltonian, n: usize, tol: f64, opts: &DykstraOptions) -> Result<LowerBoundCertificate> {
    check_level(n)?;
    let mut levels = marginal_relaxation_hierarchy(h, n, tol, opts)?;
    Ok(levels.pop().expect("level n is present"))
}

/// Relaxation bounds for every level `2..=n_max`.
///
/// The level-`N + 1` relaxation sits inside the level-`N` one, so an energy shown empty
/// at `N` is empty at `N + 1` and the previous bound starts the next bisection. Near the
/// optimum the emptiness test loses resolution as `N` grows, and without this the
/// sequence can dip.
pub fn marginal_relaxation_hierarchy(h: &PauliTwoBodyHamiltonian, n_max: usize, tol: f64, opts: &DykstraOptions) -> Result<Vec<LowerBoundCertificate>> {
    check_level(n_max)?;
    let mut out: Vec<LowerBoundCertificate> = Vec::with_capacity(n_max - 1);
    for n in 2..=n_max {
        let floor = out.last().map(|c| c.value);
        out.push(relaxation_level(h, n, tol, opts, floor)?);
    }
    Ok(out)
}

fn check_level(n: usize) -> Result<()> {
    if !(2..=6).contains(&n) {
        return Err(Error::InvalidArgument(format!("relaxation level {n} outside 2..=6")));
    }
    Ok(())
}

fn relaxation_level(h: &PauliTwoBodyHamiltonian, n: usize, tol: f64, opts: &DykstraOptions, floor: Option<f64>) -> Result<LowerBoundCertificate> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance {tol} must be positive")));
    }
    let hm = pauli_to_matrix(h);
    let norm = operator_norm(&hm)?;
    let slack = opts.tol_feas * norm;
    let mut lo = hermitian_eig(&hm)?.values[0];
    let mut hi = hm.trace() / 4.0;
    if let Some(f) = floor {
        lo = lo.max(f.min(hi));
    }
    let cert = |value| LowerBoundCertificate { value, method: BoundMethod::MarginalRelaxation, n, slack };

    let sys = MarginalConstraintSystem::new(n, ConstraintMode::Free)?;
    let w = sys.energy_weights(h);
    let w_dir = sys.direction(&w);
    if w_dir.norm() <= 1e-12 {
        return Ok(cert(hi));
    }
    let step_opts = DykstraOptions { tol_reject: tol / w_dir.norm(), ..*opts };
    let real = hm.is_real();
    let mut start = HermitianOp::identity(2, n + 1).scaled(1.0 / sys.dim() as f64);
    for _ in 0..RELAXATION_STEPS {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let accept = |c: &DensityMatrix, _: &HermitianOp| {
            (sys.residual(c.op()) <= opts.tol_feas && w.dot(&sys.coordinates(c.op())) <= mid + opts.tol_feas).then(|| c.clone())
        };
        // Only infeasibility moves the bracket, so a gap already below the rejection
        // threshold settles the step.
        let concede = 0.5 * step_opts.tol_reject;
        let project = |x: &HermitianOp| {
            let k = sys.project_below(x, &w, &w_dir, mid);
            // A real h keeps every set invariant under conjugation; what is left of the
            // imaginary part is rounding.
            if real { k.real_part() } else { k }
        };
        let out = dykstra::dykstra(start.clone(), project, accept, &step_opts, concede)?;
        start = out.iterate.op().clone();
        if out.status == DykstraStatus::Infeasible {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(cert(lo))
}
