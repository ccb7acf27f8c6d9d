use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use redset::hermitian::density_project;
use redset::inner::{MpsOptions, UniformMPS, energy_upper_bound_mps, reduced_state};
use redset::lanczos::LanczosOptions;
use redset::outer::{DykstraOptions, MembershipStatus, marginal_mismatch, membership, open_chain_lower_bound, ring_lower_bound};
use redset::{C64, DensityMatrix, Exec, HermitianOp, PauliTwoBodyHamiltonian, hermitian_eig, kron, partial_trace};

fn random_mps(seed: u64, bond: usize) -> UniformMPS {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params: Vec<f64> = (0..4 * bond * bond).map(|_| rng.sample(StandardNormal)).collect();
    UniformMPS::from_params(2, bond, &params).unwrap()
}

fn random_state(seed: u64) -> DensityMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw = DMatrix::from_fn(2, 2, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    density_project(&HermitianOp::new(2, 1, (&raw + raw.adjoint()) * C64::new(0.5, 0.0)).unwrap()).unwrap()
}

fn random_pauli(seed: u64) -> PauliTwoBodyHamiltonian {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeffs = [[0.0; 4]; 4];
    for (a, row) in coeffs.iter_mut().enumerate() {
        for (b, c) in row.iter_mut().enumerate() {
            if a > 0 && b > 0 {
                *c = rng.random_range(-1.0..1.0);
            }
        }
    }
    // Symmetric under swapping the two sites, as a translation-invariant bond should be.
    for a in 0..4 {
        for b in 0..a {
            let s = 0.5 * (coeffs[a][b] + coeffs[b][a]);
            coeffs[a][b] = s;
            coeffs[b][a] = s;
        }
    }
    PauliTwoBodyHamiltonian::new(coeffs)
}

fn check_witness(v: &redset::outer::MembershipVerdict, tol: f64) {
    let w = v.witness.as_ref().expect("members carry a witness");
    assert!(marginal_mismatch(w).unwrap() < tol);
    assert!(hermitian_eig(w.op()).unwrap().values[0] > -1e-12);
    assert!((w.op().trace() - 1.0).abs() < 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn product_states_are_members(seed in any::<u64>(), n in 2usize..=3) {
        let s = random_state(seed);
        let rho = DensityMatrix::new(kron(s.op(), s.op()).unwrap()).unwrap();
        let opts = DykstraOptions::default();
        let v = membership(&rho, n, &opts).unwrap();
        prop_assert_eq!(v.status, MembershipStatus::Member);
        check_witness(&v, opts.tol_feas);
        let w = v.witness.unwrap();
        prop_assert!(partial_trace(w.op(), &[1, 2]).unwrap().sub(rho.op()).unwrap().frobenius_norm() < 1e-6);
    }

    #[test]
    fn mps_marginals_are_translation_consistent(seed in any::<u64>(), bond in 1usize..=3) {
        let rho = reduced_state(&random_mps(seed, bond)).unwrap();
        let left = partial_trace(rho.op(), &[1]).unwrap();
        let right = partial_trace(rho.op(), &[2]).unwrap();
        prop_assert!(left.sub(&right).unwrap().frobenius_norm() < 1e-9);
    }

    #[test]
    fn mps_states_are_gauge_invariant(seed in any::<u64>(), bond in 2usize..=3) {
        let mps = random_mps(seed, bond);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
        let g = DMatrix::from_fn(bond, bond, |r, c| {
            let diag = if r == c { 2.0 } else { 0.0 };
            C64::new(diag + rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5))
        });
        let a = reduced_state(&mps).unwrap();
        let b = reduced_state(&mps.gauge_transform(&g).unwrap()).unwrap();
        prop_assert!(a.op().sub(b.op()).unwrap().frobenius_norm() < 1e-10);
    }

    #[test]
    fn lower_bounds_sit_below_mps_values(seed in any::<u64>()) {
        let h = random_pauli(seed);
        let opts = MpsOptions { restarts: 2, max_iter: 300, seed, exec: Exec::Sequential };
        let up = energy_upper_bound_mps(&h, 2, &opts).unwrap().value;
        let lanczos = LanczosOptions::default();
        for n in [4, 8] {
            let open = open_chain_lower_bound(&h, n, &lanczos).unwrap();
            let ring = ring_lower_bound(&h, n, &lanczos).unwrap();
            prop_assert!(open.certified() <= up + 1e-12);
            prop_assert!(ring.certified() <= up + 1e-12);
        }
    }

    // Two open blocks of n sites sharing one site make a block of 2n − 1 sites, so the
    // per-bond bound can only improve along n → 2n − 1. Plain monotonicity in n fails
    // for frustrated or even/odd sensitive bonds.
    #[test]
    fn open_chain_bound_improves_under_gluing(seed in any::<u64>(), n in 3usize..=7) {
        let h = random_pauli(seed);
        let lanczos = LanczosOptions::default();
        let short = open_chain_lower_bound(&h, n, &lanczos).unwrap();
        let long = open_chain_lower_bound(&h, 2 * n - 1, &lanczos).unwrap();
        prop_assert!(long.value >= short.value - 1e-9, "{} < {}", long.value, short.value);
    }
}

#[test]
fn open_chain_bound_is_flat_for_ising() {
    let lanczos = LanczosOptions::default();
    for n in 3..=12 {
        let v = open_chain_lower_bound(&PauliTwoBodyHamiltonian::zz(), n, &lanczos).unwrap().value;
        assert!((v + 1.0).abs() < 1e-9, "N={n}: {v}");
    }
}

#[test]
fn mps_states_are_members_up_to_four() {
    let opts = DykstraOptions::default();
    for seed in 0..4u64 {
        let bond = 1 + (seed as usize % 3);
        let rho = reduced_state(&random_mps(100 + seed, bond)).unwrap();
        for n in 2..=4 {
            let v = membership(&rho, n, &opts).unwrap();
            assert_eq!(v.status, MembershipStatus::Member, "seed {seed} D={bond} N={n} distance {}", v.distance_estimate);
            check_witness(&v, opts.tol_feas);
        }
    }
}

#[test]
fn membership_is_deterministic() {
    let rho = reduced_state(&random_mps(7, 2)).unwrap();
    let a = membership(&rho, 3, &DykstraOptions::default()).unwrap();
    let b = membership(&rho, 3, &DykstraOptions::default()).unwrap();
    assert_eq!(a.status, b.status);
    assert_eq!(a.iterations, b.iterations);
    assert_eq!(a.distance_estimate.to_bits(), b.distance_estimate.to_bits());
}
