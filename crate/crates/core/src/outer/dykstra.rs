use crate::hermitian::{DensityMatrix, HermitianOp, density_project};
use crate::Result;

const CHECK_EVERY: usize = 10;
/// Number of checks over which the distance must stay flat before declaring infeasibility.
const STALL_CHECKS: usize = 50;
const STALL_RTOL: f64 = 1e-5;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DykstraOptions {
    pub tol_feas: f64,
    pub tol_reject: f64,
    pub max_iter: usize,
}

impl Default for DykstraOptions {
    fn default() -> Self {
        Self { tol_feas: 1e-8, tol_reject: 1e-3, max_iter: 50_000 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DykstraStatus {
    Feasible,
    Infeasible,
    Undecided,
}

#[derive(Clone, Debug)]
pub struct DykstraOutcome {
    pub status: DykstraStatus,
    /// Accepted point when feasible, otherwise the last iterate in the density-matrix set.
    pub iterate: DensityMatrix,
    /// Frobenius distance between the last pair of iterates.
    pub distance: f64,
    pub iterations: usize,
}

/// Dykstra's alternating projections between density matrices and a convex set `K`.
///
/// `accept` receives the density-matrix iterate and its partner in `K`, and either
/// returns a verified point of the intersection or declines; it is the only route to [`DykstraStatus::Feasible`]. Infeasibility is declared when the gap
/// between the two iterates stays above `tol_reject` and stops moving. A positive
/// `concede_below` ends the run as undecided once the gap falls under it, for callers
/// that only act on infeasibility.
pub(crate) fn dykstra<P, A>(
    start: HermitianOp,
    project_k: P,
    accept: A,
    opts: &DykstraOptions,
    concede_below: f64,
) -> Result<DykstraOutcome>
where
    P: Fn(&HermitianOp) -> HermitianOp,
    A: Fn(&DensityMatrix, &HermitianOp) -> Option<DensityMatrix>,
{
    let (d, m) = (start.local_dim(), start.sites());
    let zero = HermitianOp::zeros(d, m);
    let (mut p, mut q) = (zero.clone(), zero);
    let mut x = start;
    let mut history: Vec<f64> = Vec::new();
    let mut c = density_project(&x)?;
    let mut distance = f64::INFINITY;
    for it in 1..=opts.max_iter {
        let k = project_k(&x.add(&q)?);
        q = x.add(&q)?.sub(&k)?;
        let kp = k.add(&p)?;
        c = density_project(&kp)?;
        p = kp.sub(c.op())?;
        x = c.op().clone();

        if it % CHECK_EVERY == 0 || it == opts.max_iter {
            distance = k.sub(c.op())?.frobenius_norm();
            if distance <= opts.tol_feas.sqrt() {
                if let Some(found) = accept(&c, &k) {
                    return Ok(DykstraOutcome { status: DykstraStatus::Feasible, iterate: found, distance, iterations: it });
                }
            }
            if distance < concede_below {
                return Ok(DykstraOutcome { status: DykstraStatus::Undecided, iterate: c, distance, iterations: it });
            }
            history.push(distance);
            if history.len() > STALL_CHECKS && distance > opts.tol_reject {
                let then = history[history.len() - 1 - STALL_CHECKS];
                if (then - distance).abs() <= STALL_RTOL * distance {
                    return Ok(DykstraOutcome { status: DykstraStatus::Infeasible, iterate: c, distance, iterations: it });
                }
            }
        }
    }
    Ok(DykstraOutcome { status: DykstraStatus::Undecided, iterate: c, distance, iterations: opts.max_iter })
}
