//! Anisotropic XY chain `h(γ) = (1−γ) X⊗X + (1+γ) Y⊗Y`: closed-form energy density
//! through the complete elliptic integral of the second kind, the hypergeometric ODE it
//! satisfies, and an exact-diagonalization fit of the overall energy scale.

use std::f64::consts::PI;

use crate::exec::Exec;
use crate::hermitian::{Pauli, PauliTwoBodyHamiltonian};
use crate::lanczos::{Boundary, ChainOperator, LanczosOptions};
use crate::{Error, Result};

const AGM_MAX_ITER: usize = 40;
/// Below this complementary parameter `1 − z²` the leading logarithmic series is used.
const SERIES_CUTOFF: f64 = 1e-9;
/// Calibration residuals above this fraction of the fitted value mark the fit unreliable.
const CALIBRATION_RTOL: f64 = 1e-2;

/// `E` as a function of the complementary parameter `m1 = 1 − z²`.
fn elliptic_e_complement(m1: f64) -> f64 {
    if m1 == 0.0 {
        return 1.0;
    }
    if m1 < SERIES_CUTOFF {
        return 1.0 + 0.5 * m1 * ((4.0 / m1.sqrt()).ln() - 0.5);
    }
    let mut a: f64 = 1.0;
    let mut b = m1.sqrt();
    let mut sum = 0.5 * (1.0 - m1);
    let mut pow2 = 0.5;
    for _ in 0..AGM_MAX_ITER {
        let c = 0.5 * (a - b);
        let next_b = (a * b).sqrt();
        a = 0.5 * (a + b);
        b = next_b;
        pow2 *= 2.0;
        sum += pow2 * c * c;
        if c.abs() <= f64::EPSILON * a {
            break;
        }
    }
    PI / (2.0 * a) * (1.0 - sum)
}

/// Complete elliptic integral of the second kind with modulus `z`:
/// `E(z) = ∫₀^{π/2} √(1 − z² sin²k) dk`, by the arithmetic–geometric mean.
pub fn elliptic_e_agm(z: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&z) {
        return Err(Error::InvalidArgument(format!("modulus {z} outside [0, 1]")));
    }
    Ok(elliptic_e_complement((1.0 - z) * (1.0 + z)))
}

/// `E` in the parameter convention `m = z²`.
pub fn elliptic_e_parameter(m: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&m) {
        return Err(Error::InvalidArgument(format!("parameter {m} outside [0, 1]")));
    }
    Ok(elliptic_e_complement(1.0 - m))
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma.abs() <= 1.0) {
        return Err(Error::InvalidArgument(format!("anisotropy {gamma} outside [-1, 1]")));
    }
    Ok(())
}

/// `−E(√(1−γ²))/(4π)`. Evaluated through `γ²` directly, so it is exactly even in `γ`.
pub fn xy_energy_density_paper(gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    Ok(-elliptic_e_complement(gamma * gamma) / (4.0 * PI))
}

pub fn xy_hamiltonian(gamma: f64) -> PauliTwoBodyHamiltonian {
    PauliTwoBodyHamiltonian::from_terms([(Pauli::X, Pauli::X, 1.0 - gamma), (Pauli::Y, Pauli::Y, 1.0 + gamma)])
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct XYPoint {
    pub gamma: f64,
    pub z_squared: f64,
    pub e_of_z: f64,
    pub eps_paper: f64,
    pub eps_calibrated: f64,
}

impl XYPoint {
    pub fn new(gamma: f64, scale: f64) -> Result<Self> {
        check_gamma(gamma)?;
        let e_of_z = elliptic_e_complement(gamma * gamma);
        let eps_paper = -e_of_z / (4.0 * PI);
        Ok(Self { gamma, z_squared: 1.0 - gamma * gamma, e_of_z, eps_paper, eps_calibrated: scale * eps_paper })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CalibrationEntry {
    pub gamma: f64,
    /// Energy per bond extrapolated from periodic-ring diagonalization.
    pub ed_extrapolated: f64,
    pub eps_paper: f64,
    /// `ed_extrapolated / eps_paper` at this `γ` alone.
    pub scale_at_gamma: f64,
    /// `|ed_extrapolated − s · eps_paper|` with the global fit `s`.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CalibrationResult {
    pub s: f64,
    pub entries: Vec<CalibrationEntry>,
    pub n_used: Vec<usize>,
    pub max_residual: f64,
    pub reliable: bool,
}

impl CalibrationResult {
    /// Largest relative spread `max/min − 1` of the per-`γ` scales.
    pub fn scale_spread(&self) -> f64 {
        let (lo, hi) = self.entries.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), e| {
            (lo.min(e.scale_at_gamma), hi.max(e.scale_at_gamma))
        });
        hi / lo - 1.0
    }
}

/// Energy per bond of the periodic XY ring, extrapolated from the two largest sizes
/// assuming `1/N²` finite-size corrections.
pub fn ring_extrapolated_energy(gamma: f64, n_list: &[usize], opts: &LanczosOptions) -> Result<f64> {
    let h = xy_hamiltonian(gamma);
    let k = n_list.len();
    let per_bond = |n: usize| -> Result<f64> {
        let gs = ChainOperator::from_pauli(&h, n, Boundary::Periodic)?.ground_state(opts)?;
        Ok(gs.energy / n as f64)
    };
    let (n1, n2) = (n_list[k - 2], n_list[k - 1]);
    let (e1, e2) = (per_bond(n1)?, per_bond(n2)?);
    let (w1, w2) = ((n1 * n1) as f64, (n2 * n2) as f64);
    Ok((w2 * e2 - w1 * e1) / (w2 - w1))
}

/// Least-squares scale `s` in `ED(γ) ≈ s · eps_paper(γ)` over at least five anisotropies.
pub fn calibrate_scale(gammas: &[f64], n_list: &[usize], opts: &LanczosOptions, exec: Exec) -> Result<CalibrationResult> {
    if gammas.len() < 5 {
        return Err(Error::InvalidArgument(format!("calibration needs at least 5 anisotropies, got {}", gammas.len())));
    }
    if n_list.len() < 2 || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(format!("ring sizes {n_list:?} must be strictly increasing, at least two")));
    }
    if n_list.iter().any(|&n| n < 4 || n > 16 || n % 2 == 1) {
        return Err(Error::InvalidArgument(format!("ring sizes {n_list:?} must be even and within 4..=16")));
    }
    for &g in gammas {
        check_gamma(g)?;
    }
    let ed: Vec<Result<f64>> = exec.map(gammas, |&g| ring_extrapolated_energy(g, n_list, opts));
    let mut pairs = Vec::with_capacity(gammas.len());
    for (&g, e) in gammas.iter().zip(ed) {
        pairs.push((g, e?, xy_energy_density_paper(g)?));
    }
    let num: f64 = pairs.iter().map(|(_, e, p)| e * p).sum();
    let den: f64 = pairs.iter().map(|(_, _, p)| p * p).sum();
    let s = num / den;
    let entries: Vec<CalibrationEntry> = pairs
        .iter()
        .map(|&(gamma, ed_extrapolated, eps_paper)| CalibrationEntry {
            gamma,
            ed_extrapolated,
            eps_paper,
            scale_at_gamma: ed_extrapolated / eps_paper,
            residual: (ed_extrapolated - s * eps_paper).abs(),
        })
        .collect();
    let max_residual = entries.iter().map(|e| e.residual).fold(0.0, f64::max);
    let reliable = entries.iter().all(|e| e.residual <= CALIBRATION_RTOL * (s * e.eps_paper).abs());
    Ok(CalibrationResult { s, entries, n_used: n_list.to_vec(), max_residual, reliable })
}

/// Constants `(a, b, c)` of `m(1−m)E'' + (c − (a+b+1)m)E' − abE = 0`.
pub const ELLIPTIC_E_HYPERGEOMETRIC: (f64, f64, f64) = (-0.5, 0.5, 1.0);

/// Residual of the hypergeometric equation for `E(m)`, derivatives by central differences.
pub fn hypergeom_ode_residual(m: f64, step: f64) -> Result<f64> {
    hypergeom_ode_residual_with(m, step, ELLIPTIC_E_HYPERGEOMETRIC, false)
}

/// As [`hypergeom_ode_residual`] with arbitrary constants; `richardson` combines steps
/// `h` and `h/2` to cancel the leading difference error.
pub fn hypergeom_ode_residual_with(m: f64, step: f64, abc: (f64, f64, f64), richardson: bool) -> Result<f64> {
    if !(step > 0.0) || m < 10.0 * step || m > 1.0 - 10.0 * step {
        return Err(Error::InvalidArgument(format!("m = {m} too close to the endpoints for step {step}")));
    }
    let e = |x: f64| elliptic_e_complement(1.0 - x);
    let derivs = |h: f64| {
        let (lo, mid, hi) = (e(m - h), e(m), e(m + h));
        ((hi - lo) / (2.0 * h), (hi - 2.0 * mid + lo) / (h * h))
    };
    let (d1, d2) = if richardson {
        let (a1, a2) = derivs(step);
        let (b1, b2) = derivs(step / 2.0);
        ((4.0 * b1 - a1) / 3.0, (4.0 * b2 - a2) / 3.0)
    } else {
        derivs(step)
    };
    let (a, b, c) = abc;
    Ok((m * (1.0 - m) * d2 + (c - (a + b + 1.0) * m) * d1 - a * b * e(m)).abs())
}
