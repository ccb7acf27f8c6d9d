//! Search for a bounded-degree polynomial relation `P(x, f(x)) = 0` in sampled data.
//!
//! A vanishing smallest singular value of the monomial design matrix is evidence of an
//! algebraic relation. A positive result at finite precision is never a proof, and a
//! negative one only rules out relations up to the tested degree.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::exec::Exec;
use crate::xy::xy_energy_density_paper;
use crate::{Error, Result};

/// Threshold on both the smallest singular value and the holdout residual.
pub const RELATION_TOL: f64 = 1e-8;

pub const DEFAULT_SAMPLES: usize = 64;
pub const DEFAULT_DOMAIN: (f64, f64) = (0.1, 0.9);

#[derive(Clone, Debug, PartialEq)]
pub struct RelationSearchResult {
    pub degree: usize,
    pub sigma_min: f64,
    /// Coefficients on [`monomial_exponents`], in the affinely rescaled variables.
    pub best_coeffs: Vec<f64>,
    pub residual_max: f64,
    pub relation_found: bool,
    /// Always true: the result is numerical evidence, not a certificate.
    pub evidence_only: bool,
}

/// Exponents `(a, b)` of the monomials `y^a x^b` with `a + b ≤ degree`, ordered by total
/// degree and then by the power of `y`.
pub fn monomial_exponents(degree: usize) -> Vec<(usize, usize)> {
    (0..=degree).flat_map(|t| (0..=t).map(move |a| (a, t - a))).collect()
}

/// Affine map of `[lo, hi]` onto `[−1, 1]`; a degenerate range is only centred.
#[derive(Clone, Copy, Debug)]
struct Affine {
    centre: f64,
    half: f64,
}

impl Affine {
    fn fit(v: impl Iterator<Item = f64> + Clone) -> Self {
        let lo = v.clone().fold(f64::INFINITY, f64::min);
        let hi = v.fold(f64::NEG_INFINITY, f64::max);
        let half = 0.5 * (hi - lo);
        Self { centre: 0.5 * (hi + lo), half: if half > 0.0 { half } else { 1.0 } }
    }

    fn apply(self, t: f64) -> f64 {
        (t - self.centre) / self.half
    }
}

fn design(points: &[(f64, f64)], ax: Affine, ay: Affine, exps: &[(usize, usize)]) -> DMatrix<f64> {
    DMatrix::from_fn(points.len(), exps.len(), |i, j| {
        let (x, y) = points[i];
        let (a, b) = exps[j];
        ay.apply(y).powi(a as i32) * ax.apply(x).powi(b as i32)
    })
}

/// Smallest singular value of the column-normalized design matrix on `samples` and the
/// largest residual of the corresponding relation on `holdout`.
pub fn relation_search(samples: &[(f64, f64)], degree: usize, holdout: &[(f64, f64)]) -> Result<RelationSearchResult> {
    let exps = monomial_exponents(degree);
    if degree == 0 || samples.len() < 2 * exps.len() {
        return Err(Error::InvalidArgument(format!(
            "degree {degree} needs at least {} samples, got {}",
            2 * exps.len(),
            samples.len()
        )));
    }
    if holdout.is_empty() {
        return Err(Error::InvalidArgument("empty holdout set".into()));
    }
    if samples.iter().chain(holdout).any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::InvalidArgument("non-finite sample".into()));
    }
    let mut xs: Vec<f64> = samples.iter().map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    if xs.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidArgument("sample abscissae must be distinct".into()));
    }

    let ax = Affine::fit(samples.iter().map(|p| p.0));
    let ay = Affine::fit(samples.iter().map(|p| p.1));
    let mut m = design(samples, ax, ay, &exps);
    let norms: Vec<f64> = m.column_iter().map(|c| c.norm()).collect();
    for (j, n) in norms.iter().enumerate() {
        m.column_mut(j).unscale_mut(*n);
    }
    let svd = m.svd(false, true);
    let v_t = svd.v_t.as_ref().expect("requested right singular vectors");
    let (k, sigma_min) = svd
        .singular_values
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("at least one column");
    let best_coeffs: Vec<f64> = v_t.row(k).iter().copied().collect();

    // rescale so each normalized column has unit root-mean-square on the fit samples
    let rms = (samples.len() as f64).sqrt();
    let h = design(holdout, ax, ay, &exps);
    let residual_max = h
        .row_iter()
        .map(|row| {
            row.iter()
                .zip(&best_coeffs)
                .zip(&norms)
                .map(|((v, c), n)| v * c * rms / n)
                .sum::<f64>()
                .abs()
        })
        .fold(0.0, f64::max);

    Ok(RelationSearchResult {
        degree,
        sigma_min,
        best_coeffs,
        residual_max,
        relation_found: sigma_min < RELATION_TOL && residual_max < RELATION_TOL,
        evidence_only: true,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ProbeTarget {
    /// `γ ↦ −E(√(1−γ²))/(4π)`.
    EpsPaper,
    /// The same function times a fitted scale.
    EpsCalibrated { scale: f64 },
    /// `x²`, algebraic of degree 2.
    ControlX2,
    /// `√(1+x)`, algebraic of degree 2 in `y`.
    ControlSqrt,
    /// `eˣ`, transcendental.
    ControlExp,
}

impl ProbeTarget {
    pub fn name(&self) -> &'static str {
        match self {
            ProbeTarget::EpsPaper => "eps_paper",
            ProbeTarget::EpsCalibrated { .. } => "eps_calibrated",
            ProbeTarget::ControlX2 => "control_x2",
            ProbeTarget::ControlSqrt => "control_sqrt",
            ProbeTarget::ControlExp => "control_exp",
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        Ok(match self {
            ProbeTarget::EpsPaper => xy_energy_density_paper(x)?,
            ProbeTarget::EpsCalibrated { scale } => scale * xy_energy_density_paper(x)?,
            ProbeTarget::ControlX2 => x * x,
            ProbeTarget::ControlSqrt => (1.0 + x).sqrt(),
            ProbeTarget::ControlExp => x.exp(),
        })
    }
}

/// `2n` jittered Chebyshev nodes on `domain`, ascending; even positions are fit samples
/// and odd positions the holdout.
pub fn sample_points(n: usize, domain: (f64, f64), seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = 2 * n;
    let (mid, half) = (0.5 * (domain.0 + domain.1), 0.5 * (domain.1 - domain.0));
    let mut nodes: Vec<f64> = (0..total)
        .map(|k| {
            let u: f64 = rng.random_range(-0.25..0.25);
            mid + half * ((2.0 * k as f64 + 1.0 + u) * std::f64::consts::PI / (2.0 * total as f64)).cos()
        })
        .collect();
    nodes.sort_by(f64::total_cmp);
    let fit = nodes.iter().step_by(2).copied().collect();
    let holdout = nodes.iter().skip(1).step_by(2).copied().collect();
    (fit, holdout)
}

/// Runs [`relation_search`] for every degree `1..=d_max`.
pub fn probe_sweep(target: ProbeTarget, d_max: usize, n_samples: usize, seed: u64, exec: Exec) -> Result<Vec<RelationSearchResult>> {
    let (fit, hold) = sample_points(n_samples, DEFAULT_DOMAIN, seed);
    let eval = |xs: &[f64]| -> Result<Vec<(f64, f64)>> { xs.iter().map(|&x| Ok((x, target.eval(x)?))).collect() };
    let (fit, hold) = (eval(&fit)?, eval(&hold)?);
    let degrees: Vec<usize> = (1..=d_max).collect();
    exec.map(&degrees, |&d| relation_search(&fit, d, &hold)).into_iter().collect()
}
