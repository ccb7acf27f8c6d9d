use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::mps::{GAP_TOL, UniformMPS, transfer_fixed_points, two_site_reduced_state};
use super::nelder_mead::{NelderMeadOptions, nelder_mead};
use crate::exec::Exec;
use crate::hermitian::{HermitianOp, PauliTwoBodyHamiltonian, pauli_to_matrix};
use crate::{Error, Result};

const PERTURB_SCALE: f64 = 1e-6;
const PERTURB_RETRIES: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MpsOptions {
    pub restarts: usize,
    pub max_iter: usize,
    pub seed: u64,
    pub exec: Exec,
}

impl Default for MpsOptions {
    fn default() -> Self {
        Self { restarts: 16, max_iter: 2000, seed: 0, exec: Exec::Parallel }
    }
}

/// Variational upper bound `tr(ρ₂(A) h)` reached by the best tensor found.
#[derive(Clone, Debug)]
pub struct MpsBound {
    pub bond_dim: usize,
    pub value: f64,
    pub tensor: UniformMPS,
    pub rejected_restarts: usize,
    pub evaluations: usize,
}

/// `tr(ρ₂(A) h)`, or `None` for tensors whose fixed points are ill defined.
pub fn mps_energy(mps: &UniformMPS, h: &HermitianOp) -> Option<f64> {
    let fp = transfer_fixed_points(mps, GAP_TOL).ok()?;
    let rho = two_site_reduced_state(mps, &fp).ok()?;
    Some(rho.expect(h))
}

fn restart_seed(seed: u64, bond: usize, restart: usize) -> u64 {
    let mut z = seed ^ ((bond as u64) << 48) ^ (restart as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct RestartOutcome {
    best: Option<(Vec<f64>, f64)>,
    evaluations: usize,
}

fn run_restart(h: &HermitianOp, bond: usize, start: Option<&[f64]>, seed: u64, max_iter: usize) -> RestartOutcome {
    let d = h.local_dim();
    let n = 2 * d * bond * bond;
    let objective = |x: &[f64]| UniformMPS::from_params(d, bond, x).ok().and_then(|m| mps_energy(&m, h)).unwrap_or(f64::INFINITY);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x0: Vec<f64> = match start {
        Some(s) => s.to_vec(),
        None => (0..n).map(|_| StandardNormal.sample(&mut rng)).collect(),
    };
    let mut evaluations = 0;
    let mut f0 = objective(&x0);
    evaluations += 1;
    for _ in 0..PERTURB_RETRIES {
        if f0.is_finite() {
            break;
        }
        for v in x0.iter_mut() {
            let z: f64 = StandardNormal.sample(&mut rng);
            *v += PERTURB_SCALE * z;
        }
        f0 = objective(&x0);
        evaluations += 1;
    }
    if !f0.is_finite() {
        return RestartOutcome { best: None, evaluations };
    }
    let scale = x0.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-3);
    let opts = NelderMeadOptions { max_iter, step: 0.2 * scale, ..Default::default() };
    let r = nelder_mead(objective, &x0, &opts);
    RestartOutcome { best: r.f.is_finite().then_some((r.x, r.f)), evaluations: evaluations + r.evaluations }
}

fn optimize_level(h: &HermitianOp, bond: usize, seed_point: Option<&UniformMPS>, opts: &MpsOptions) -> Result<MpsBound> {
    let d = h.local_dim();
    let embedded = seed_point.map(|m| m.embed(bond)).transpose()?.map(|m| m.to_params());
    let restarts: Vec<usize> = (0..opts.restarts.max(1)).collect();
    let outcomes = opts.exec.map(&restarts, |&r| {
        let start = if r == 0 { embedded.as_deref() } else { None };
        run_restart(h, bond, start, restart_seed(opts.seed, bond, r), opts.max_iter)
    });
    let evaluations = outcomes.iter().map(|o| o.evaluations).sum();
    let rejected_restarts = outcomes.iter().filter(|o| o.best.is_none()).count();
    let best = outcomes
        .into_iter()
        .filter_map(|o| o.best)
        .fold(None::<(Vec<f64>, f64)>, |acc, cand| match acc {
            Some(a) if a.1 <= cand.1 => Some(a),
            _ => Some(cand),
        })
        .ok_or_else(|| Error::DegenerateTransfer(format!("all {} restarts at bond dimension {bond} were rejected", restarts.len())))?;
    Ok(MpsBound { bond_dim: bond, value: best.1, tensor: UniformMPS::from_params(d, bond, &best.0)?, rejected_restarts, evaluations })
}

/// Upper bounds for bond dimensions `1..=d_max`. The first restart at each `D > 1` starts
/// from the best tensor of `D − 1`, so the sequence never increases.
pub fn mps_hierarchy(h: &PauliTwoBodyHamiltonian, d_max: usize, opts: &MpsOptions) -> Result<Vec<MpsBound>> {
    if d_max == 0 {
        return Err(Error::InvalidArgument("bond dimension must be at least 1".into()));
    }
    let hm = pauli_to_matrix(h);
    let mut out: Vec<MpsBound> = Vec::with_capacity(d_max);
    for bond in 1..=d_max {
        let level = optimize_level(&hm, bond, out.last().map(|b| &b.tensor), opts)?;
        out.push(level);
    }
    Ok(out)
}

pub fn energy_upper_bound_mps(h: &PauliTwoBodyHamiltonian, bond: usize, opts: &MpsOptions) -> Result<MpsBound> {
    Ok(mps_hierarchy(h, bond, opts)?.pop().expect("non-empty hierarchy"))
}

/// Best translation-invariant product state, `min_σ tr((σ⊗σ) h)` over pure `σ`.
pub fn product_state_bound(h: &PauliTwoBodyHamiltonian, restarts: usize, seed: u64) -> Result<f64> {
    let opts = MpsOptions { restarts, seed, ..Default::default() };
    Ok(optimize_level(&pauli_to_matrix(h), 1, None, &opts)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian::Pauli;

    fn quick() -> MpsOptions {
        MpsOptions { restarts: 4, max_iter: 2000, seed: 5, exec: Exec::Parallel }
    }

    #[test]
    fn zz_product_bound() {
        assert!(product_state_bound(&PauliTwoBodyHamiltonian::zz(), 4, 1).unwrap().abs() < 1e-8);
        let ferro = PauliTwoBodyHamiltonian::zz().scaled(-1.0);
        assert!((product_state_bound(&ferro, 4, 1).unwrap() + 1.0).abs() < 1e-8);
    }

    #[test]
    fn ising_point_product_bound() {
        // 2YY: min over Bloch vectors of 2 m_y² is 0
        let h = PauliTwoBodyHamiltonian::from_terms([(Pauli::Y, Pauli::Y, 2.0)]);
        let v = product_state_bound(&h, 4, 2).unwrap();
        assert!(v.abs() < 1e-8 && v >= -1e-12);
    }

    #[test]
    fn zz_bond_two_reaches_neel() {
        let b = mps_hierarchy(&PauliTwoBodyHamiltonian::zz(), 2, &quick()).unwrap();
        assert!(b[0].value.abs() < 1e-6);
        assert!((b[1].value + 1.0).abs() < 1e-6, "{}", b[1].value);
    }

    #[test]
    fn hierarchy_is_monotone_and_deterministic() {
        let h = crate::xy::xy_hamiltonian(0.5);
        let opts = MpsOptions { restarts: 3, max_iter: 600, seed: 11, exec: Exec::Parallel };
        let a = mps_hierarchy(&h, 3, &opts).unwrap();
        for w in a.windows(2) {
            assert!(w[1].value <= w[0].value + 1e-9);
        }
        let b = mps_hierarchy(&h, 3, &MpsOptions { exec: Exec::Sequential, ..opts }).unwrap();
        let va: Vec<f64> = a.iter().map(|x| x.value).collect();
        let vb: Vec<f64> = b.iter().map(|x| x.value).collect();
        assert_eq!(va, vb);
    }

    #[test]
    fn seeds_are_distinct() {
        let s: std::collections::HashSet<u64> = (0..16).flat_map(|r| (1..5).map(move |d| restart_seed(0, d, r))).collect();
        assert_eq!(s.len(), 64);
    }
}
