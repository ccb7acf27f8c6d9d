//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use redset::inner::{MpsBound, MpsOptions, UniformMPS, mps_hierarchy, reduced_state};
use redset::lanczos::LanczosOptions;
use redset::outer::{
    DykstraOptions, LowerBoundCertificate, MembershipStatus, marginal_mismatch, marginal_relaxation_hierarchy, membership,
    open_chain_lower_bound, ring_lower_bound,
};
use redset::probe::{DEFAULT_SAMPLES, ProbeTarget, probe_sweep};
use redset::xy::{
    ELLIPTIC_E_HYPERGEOMETRIC, calibrate_scale, elliptic_e_agm, hypergeom_ode_residual_with, ring_extrapolated_energy,
    xy_energy_density_paper, xy_hamiltonian,
};
use redset::{C64, DensityMatrix, Exec, PauliTwoBodyHamiltonian, hermitian_eig};
use redset_cli::commands::{DEFAULT_CAL_GAMMAS, DEFAULT_CAL_RINGS};
use redset_cli::config::{parse_f64_grid, parse_usize_range};
use redset_cli::report::{BoundRow, Side, body, check_sandwich};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

/// Adaptive Simpson quadrature, independent of the AGM route.
fn quadrature(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64, m: f64, fm: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) + recurse(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, m, fm, whole, tol, 48)
}

fn criterion_1() -> Verdict {
    let t = Instant::now();
    let mut grid: Vec<f64> = (0..=9).map(|k| k as f64 / 10.0).collect();
    grid.extend([0.99, 0.999]);
    let mut worst: f64 = 0.0;
    for &z in &grid {
        let f = move |k: f64| (1.0 - z * z * k.sin().powi(2)).sqrt();
        let q = quadrature(&f, 0.0, std::f64::consts::FRAC_PI_2, 1e-15);
        worst = worst.max((elliptic_e_agm(z).unwrap() - q).abs());
    }
    let e0 = (elliptic_e_agm(0.0).unwrap() - std::f64::consts::FRAC_PI_2).abs();
    let e1 = (elliptic_e_agm(1.0).unwrap() - 1.0).abs();
    let secs = t.elapsed().as_secs_f64();
    verdict(
        worst < 1e-11 && e0 < 1e-13 && e1 < 1e-13 && secs < 1.0,
        format!("max |agm − quadrature| = {worst:.2e}, |E(0) − π/2| = {e0:.1e}, |E(1) − 1| = {e1:.1e}, {secs:.2} s"),
    )
}

fn criterion_2() -> Verdict {
    let t = Instant::now();
    let (mut worst, mut control_min) = (0.0f64, f64::INFINITY);
    for k in 1..=18 {
        let m = 0.05 * k as f64;
        worst = worst.max(hypergeom_ode_residual_with(m, 1e-4, ELLIPTIC_E_HYPERGEOMETRIC, false).unwrap());
        control_min = control_min.min(hypergeom_ode_residual_with(m, 1e-4, (1.0, 1.0, 1.0), false).unwrap());
    }
    let secs = t.elapsed().as_secs_f64();
    verdict(
        worst < 1e-5 && control_min > 1e-2 && secs < 1.0,
        format!("max residual {worst:.2e}, min wrong-constant residual {control_min:.2e}, {secs:.2} s"),
    )
}

fn criterion_3() -> Verdict {
    let t = Instant::now();
    let zz = PauliTwoBodyHamiltonian::zz();
    let open = open_chain_lower_bound(&zz, 12, &LanczosOptions::default()).unwrap().value;
    let levels = mps_hierarchy(&zz, 2, &MpsOptions::default()).unwrap();
    let (d1, d2) = (levels[0].value, levels[1].value);
    let secs = t.elapsed().as_secs_f64();
    verdict(
        (open + 1.0).abs() < 1e-9 && d1.abs() < 1e-6 && (d2 + 1.0).abs() < 1e-6 && secs < 30.0,
        format!("open N=12 {open:.12}, MPS D=1 {d1:.3e}, D=2 {d2:.9}, {secs:.1} s"),
    )
}

fn criterion_4() -> Verdict {
    let t = Instant::now();
    let lanczos = LanczosOptions::default();
    let gammas = parse_f64_grid(DEFAULT_CAL_GAMMAS).unwrap();
    let rings = parse_usize_range(DEFAULT_CAL_RINGS).unwrap();
    let cal = calibrate_scale(&gammas, &rings, &lanczos, Exec::Parallel).unwrap();
    let s = cal.s;
    let mut pass = cal.reliable;
    let mut parts = vec![format!("s = {s:.6}")];
    let mut local = Vec::new();
    for g in [0.0, 0.5, 0.9] {
        let h = xy_hamiltonian(g);
        let exact = s * xy_energy_density_paper(g).unwrap();
        let lb = open_chain_lower_bound(&h, 14, &lanczos).unwrap();
        let ub = mps_hierarchy(&h, 4, &MpsOptions::default()).unwrap().last().unwrap().value;
        let ok = lb.certified() <= exact && exact <= ub && (ub - lb.value) < 0.08 * exact.abs();
        pass &= ok;
        parts.push(format!("γ={g}: {:.6} ≤ {exact:.6} ≤ {ub:.6} gap {:.4}", lb.value, (ub - lb.value) / exact.abs()));
        local.push(ring_extrapolated_energy(g, &rings, &lanczos).unwrap() / xy_energy_density_paper(g).unwrap());
    }
    let (lo, hi) = local.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let spread = hi / lo - 1.0;
    let secs = t.elapsed().as_secs_f64();
    pass &= spread < 0.01 && secs < 600.0;
    parts.push(format!("local scale spread {spread:.2e}, {secs:.0} s"));
    verdict(pass, parts.join("; "))
}

fn random_mps(seed: u64, bond: usize) -> UniformMPS {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params: Vec<f64> = (0..4 * bond * bond).map(|_| rng.sample(StandardNormal)).collect();
    UniformMPS::from_params(2, bond, &params).unwrap()
}

fn witness_ok(w: Option<&DensityMatrix>, tol: f64) -> bool {
    w.is_some_and(|w| marginal_mismatch(w).unwrap() < tol && hermitian_eig(w.op()).unwrap().values[0] > -1e-12)
}

fn criterion_5() -> Verdict {
    let t = Instant::now();
    let opts = DykstraOptions::default();
    let mut failures = Vec::new();
    let mixed = DensityMatrix::maximally_mixed(2, 2);
    for n in 2..=5 {
        let v = membership(&mixed, n, &opts).unwrap();
        if v.status != MembershipStatus::Member || !witness_ok(v.witness.as_ref(), opts.tol_feas) {
            failures.push(format!("I/4 at N={n}: {:?}", v.status));
        }
    }
    let tilted = DensityMatrix::basis_state(2, &[0, 1]).unwrap();
    let v = membership(&tilted, 3, &opts).unwrap();
    if v.status != MembershipStatus::NonMember || v.iterations != 0 {
        failures.push(format!("|01⟩: {:?} after {} iterations", v.status, v.iterations));
    }
    let s = 0.5f64.sqrt();
    let zero = C64::new(0.0, 0.0);
    let singlet = DensityMatrix::pure(2, 2, &[zero, C64::new(s, 0.0), C64::new(-s, 0.0), zero]).unwrap();
    let v = membership(&singlet, 2, &opts).unwrap();
    let singlet_distance = v.distance_estimate;
    if v.status != MembershipStatus::NonMember || singlet_distance <= 1e-2 {
        failures.push(format!("singlet: {:?} distance {singlet_distance:.3e}", v.status));
    }
    let mut mps_checks = 0;
    for k in 0..10u64 {
        let bond = 1 + (k as usize % 3);
        let rho = reduced_state(&random_mps(1000 + k, bond)).unwrap();
        for n in 2..=4 {
            let v = membership(&rho, n, &opts).unwrap();
            mps_checks += 1;
            if v.status != MembershipStatus::Member || !witness_ok(v.witness.as_ref(), opts.tol_feas) {
                failures.push(format!("MPS #{k} D={bond} N={n}: {:?} distance {:.2e}", v.status, v.distance_estimate));
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    if secs >= 300.0 {
        failures.push(format!("runtime {secs:.0} s"));
    }
    let detail = format!("singlet distance {singlet_distance:.3e}, {mps_checks} MPS checks, {secs:.1} s");
    if failures.is_empty() { verdict(true, detail) } else { verdict(false, format!("{detail}; {}", failures.join("; "))) }
}

fn lower_row(method: &str, c: &LowerBoundCertificate) -> BoundRow {
    BoundRow { side: Side::Lower, method: method.into(), param: c.n, value: c.value, slack: c.slack }
}

fn upper_row(b: &MpsBound) -> BoundRow {
    BoundRow { side: Side::Upper, method: "mps".into(), param: b.bond_dim, value: b.value, slack: 0.0 }
}

fn criterion_6() -> Verdict {
    let t = Instant::now();
    let models = [
        ("zz", PauliTwoBodyHamiltonian::zz()),
        ("heisenberg", PauliTwoBodyHamiltonian::heisenberg()),
        ("xy(0.5)", xy_hamiltonian(0.5)),
    ];
    let reports: Vec<(bool, String)> = std::thread::scope(|scope| {
        let handles: Vec<_> = models
            .iter()
            .map(|(name, h)| {
                scope.spawn(move || {
                    let lanczos = LanczosOptions::default();
                    let relax: Vec<LowerBoundCertificate> =
                        marginal_relaxation_hierarchy(h, 5, 1e-4, &DykstraOptions::default()).unwrap();
                    let relax_ok = relax.windows(2).all(|w| w[1].value + w[1].slack >= w[0].value - w[0].slack);
                    let mps = mps_hierarchy(h, 4, &MpsOptions::default()).unwrap();
                    let mps_ok = mps.windows(2).all(|w| w[1].value <= w[0].value);
                    let mut rows: Vec<BoundRow> = relax.iter().map(|c| lower_row("marginal_relaxation", c)).collect();
                    for n in [4, 8, 12] {
                        rows.push(lower_row("open_chain", &open_chain_lower_bound(h, n, &lanczos).unwrap()));
                        rows.push(lower_row("ring", &ring_lower_bound(h, n, &lanczos).unwrap()));
                    }
                    rows.extend(mps.iter().map(upper_row));
                    let sandwich = check_sandwich(&rows);
                    let values = |v: Vec<f64>| v.iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>().join(" ");
                    let line = format!(
                        "{name}: relaxation [{}] {}, MPS [{}] {}, sandwich {}",
                        values(relax.iter().map(|c| c.value).collect()),
                        if relax_ok { "monotone" } else { "NOT monotone" },
                        values(mps.iter().map(|b| b.value).collect()),
                        if mps_ok { "monotone" } else { "NOT monotone" },
                        match &sandwich {
                            Ok(()) => "holds".to_string(),
                            Err(e) => e.to_string(),
                        }
                    );
                    (relax_ok && mps_ok && sandwich.is_ok(), line)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let pass = reports.iter().all(|(ok, _)| *ok);
    let mut detail: Vec<String> = reports.into_iter().map(|(_, l)| l).collect();
    detail.push(format!("{:.0} s", t.elapsed().as_secs_f64()));
    verdict(pass, detail.join("; "))
}

fn criterion_7() -> Verdict {
    let t = Instant::now();
    let mut failures = Vec::new();
    for (target, degree) in [(ProbeTarget::ControlX2, 2), (ProbeTarget::ControlSqrt, 2)] {
        let sweep = probe_sweep(target, degree, DEFAULT_SAMPLES, 0, Exec::Parallel).unwrap();
        for r in &sweep {
            if r.relation_found != (r.degree >= degree) {
                failures.push(format!("{} D={} relation_found={}", target.name(), r.degree, r.relation_found));
            }
        }
    }
    let sweep = probe_sweep(ProbeTarget::EpsPaper, 6, DEFAULT_SAMPLES, 0, Exec::Parallel).unwrap();
    let found: Vec<usize> = sweep.iter().filter(|r| r.relation_found).map(|r| r.degree).collect();
    if !found.is_empty() {
        let sig: Vec<String> = sweep.iter().map(|r| format!("D={}:{:.1e}", r.degree, r.sigma_min)).collect();
        failures.push(format!("eps_paper relation_found at D={found:?} (sigma_min {})", sig.join(" ")));
    }
    if !sweep.iter().all(|r| r.evidence_only) {
        failures.push("eps_paper rows missing evidence_only".into());
    }
    let secs = t.elapsed().as_secs_f64();
    if secs >= 60.0 {
        failures.push(format!("runtime {secs:.0} s"));
    }
    let detail = format!("controls and eps_paper sweep, {secs:.2} s");
    if failures.is_empty() { verdict(true, detail) } else { verdict(false, format!("{detail}; {}", failures.join("; "))) }
}

fn run_cli(args: &[&str], threads: &str) -> String {
    let o = Command::new(env!("CARGO_BIN_EXE_redset")).args(args).env("REDSET_THREADS", threads).output().expect("binary runs");
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    body(&String::from_utf8(o.stdout).unwrap())
}

fn criterion_8() -> Verdict {
    let t = Instant::now();
    let runs: [&[&str]; 3] = [
        &["bounds", "--model", "xy", "--gamma", "0.5", "--open-n", "6:10", "--ring-n", "8", "--marginal-n", "2", "--mps-d", "1:3", "--restarts", "6", "--max-iter", "600", "--seed", "11"],
        &["probe", "--target", "control_sqrt", "--d-max", "4", "--seed", "3"],
        &["xy", "--gamma-grid", "0:1:0.1", "--scale", "16"],
    ];
    let mut mismatched = Vec::new();
    for args in runs {
        let bodies = [run_cli(args, "1"), run_cli(args, "4"), run_cli(args, "4"), run_cli(args, "1")];
        if bodies.iter().any(|b| b != &bodies[0]) {
            mismatched.push(args[0]);
        }
    }
    let secs = t.elapsed().as_secs_f64();
    verdict(mismatched.is_empty(), format!("bounds/probe/xy bodies under REDSET_THREADS 1,4,4,1; mismatched {mismatched:?}; {secs:.1} s"))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 8] = [
        ("elliptic integral", criterion_1),
        ("hypergeometric equation", criterion_2),
        ("Ising battery", criterion_3),
        ("XY sandwich", criterion_4),
        ("membership oracle", criterion_5),
        ("hierarchy properties", criterion_6),
        ("probe separation", criterion_7),
        ("reproducibility", criterion_8),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|v| v.parse().ok());
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        if only.is_some_and(|o| o != k + 1) {
            continue;
        }
        let v = run();
        println!("{} criterion {} ({name}): {}", if v.pass { "PASS" } else { "FAIL" }, k + 1, v.detail);
        failed += usize::from(!v.pass);
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
