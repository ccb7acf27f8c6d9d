//! Nelder–Mead simplex minimization with dimension-adapted coefficients.

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NelderMeadOptions {
    pub max_iter: usize,
    /// Initial simplex edge length.
    pub step: f64,
    /// Stop when the spread of simplex values falls below `ftol · (1 + |f_best|)`.
    pub ftol: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self { max_iter: 2000, step: 0.2, ftol: 1e-14 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub evaluations: usize,
}

/// Minimizes `f` starting from `x0`. When the simplex collapses before the iteration
/// budget is spent, a fresh simplex is built around the best point; the search ends
/// once a rebuilt simplex brings no improvement.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], opts: &NelderMeadOptions) -> NelderMeadResult {
    let n = x0.len();
    let mut evaluations = 0;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        let v = f(x);
        if v.is_nan() { f64::INFINITY } else { v }
    };
    let mut best = (x0.to_vec(), eval(x0));
    if n == 0 {
        return NelderMeadResult { x: best.0, f: best.1, iterations: 0, evaluations };
    }
    let nf = n as f64;
    let (alpha, beta, gamma, delta) = (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf);

    let mut iterations = 0;
    let mut step = opts.step;
    while iterations < opts.max_iter {
        let start_f = best.1;
        let mut simplex: Vec<(Vec<f64>, f64)> = vec![best.clone()];
        for i in 0..n {
            let mut x = best.0.clone();
            x[i] += step;
            let v = eval(&x);
            simplex.push((x, v));
        }
        while iterations < opts.max_iter {
            iterations += 1;
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let (fb, fw) = (simplex[0].1, simplex[n].1);
            if fw.is_finite() && fw - fb <= opts.ftol * (1.0 + fb.abs()) {
                break;
            }
            let mut centroid = vec![0.0; n];
            for (x, _) in &simplex[..n] {
                for (c, xi) in centroid.iter_mut().zip(x) {
                    *c += xi / nf;
                }
            }
            let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&simplex[n].0).map(|(c, w)| c + t * (c - w)).collect() };
            let xr = along(alpha);
            let fr = eval(&xr);
            if fr < simplex[0].1 {
                let xe = along(alpha * beta);
                let fe = eval(&xe);
                simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
                continue;
            }
            if fr < simplex[n - 1].1 {
                simplex[n] = (xr, fr);
                continue;
            }
            let (xc, fc) = if fr < fw {
                let x = along(alpha * gamma);
                let v = eval(&x);
                (x, v)
            } else {
                let x = along(-gamma);
                let v = eval(&x);
                (x, v)
            };
            if fc < fr.min(fw) {
                simplex[n] = (xc, fc);
                continue;
            }
            let x_best = simplex[0].0.clone();
            for (x, v) in simplex.iter_mut().skip(1) {
                for (xi, bi) in x.iter_mut().zip(&x_best) {
                    *xi = bi + delta * (*xi - bi);
                }
                *v = eval(x);
            }
        }
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[0].1 < best.1 {
            best = simplex.swap_remove(0);
        }
        if !(best.1 < start_f) {
            if step < 1e-6 * opts.step {
                break;
            }
            step *= 0.1;
        }
    }
    NelderMeadResult { x: best.0, f: best.1, iterations, evaluations }
}
