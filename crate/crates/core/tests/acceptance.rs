//! Acceptance suite. Every test prints one `PASS`/`FAIL` line with the
//! measured quantities before asserting, so `--nocapture` gives a report.

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ecm_core::ecm::{check_monotone, lambda_equiv, run_ecm_1d, run_ecm_2d, EcmTrace};
use ecm_core::elastic1d::stochastic_force_experiment;
use ecm_core::fem::{
    energy_norm, h1_diff, h1_norm, mean_partial2_u2, tensile_force_2d, DisplacementField,
    LinearSolver, Mesh2D, RhsFunctional, SolveOptions, TensileSystem,
};
use ecm_core::geometry::solve_ecm_radii;
use ecm_core::homogenization::delta_sweep_2d;
use ecm_core::material::{MaterialField2D, PhaseAssignment, PhaseParams};
use ecm_core::perturbation::{
    approximation_sweep, ecm_first_iteration_perturbation, error_order_fit, series_terms,
};
use ecm_core::plasticity::{
    solve_stress_strain, stress_strain_curve, yield_displacement, PlasticMetalLaw,
};

fn report(id: u32, name: &str, pass: bool, elapsed: Duration, detail: &str) {
    println!(
        "[criterion {id:>2}] {} {name} ({:.2} s) {detail}",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Harmonic mean written out independently of the library.
fn harmonic(k_met: f64, k_cer: f64, vol_cer: f64) -> f64 {
    1.0 / ((1.0 - vol_cer) / k_met + vol_cer / k_cer)
}

fn random_1d_params(n: usize) -> Vec<PhaseParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    (0..n)
        .map(|_| {
            PhaseParams::longitudinal(
                rng.gen_range(0.5..10.0),
                rng.gen_range(0.5..10.0),
                rng.gen_range(0.05..0.95),
            )
            .unwrap()
        })
        .collect()
}

#[test]
fn criterion_01_one_dimensional_limit() {
    const REL_TOL: f64 = 1e-10;
    const MAX_ITERATIONS: usize = 60;
    const STOP_TOL: f64 = 1e-12;
    let start = Instant::now();
    let mut worst_err: f64 = 0.0;
    let mut worst_iter = 0;
    for p in random_1d_params(20) {
        let trace = run_ecm_1d(&p, 1.0, STOP_TOL, 10_000).unwrap();
        assert!(trace.converged);
        worst_err = worst_err.max(rel(
            trace.limit(),
            harmonic(p.kappa_met, p.kappa_cer, p.vol_cer),
        ));
        worst_iter = worst_iter.max(trace.iterations);
    }
    let elapsed = start.elapsed();
    let accurate = worst_err <= REL_TOL;
    let fast = worst_iter <= MAX_ITERATIONS;
    let pass = accurate && fast && elapsed < Duration::from_secs(1);
    report(
        1,
        "1D limit equals harmonic mean",
        pass,
        elapsed,
        &format!(
            "max rel err {worst_err:.2e} (<= {REL_TOL:.0e}: {accurate}), max iterations {worst_iter} (<= {MAX_ITERATIONS}: {fast})"
        ),
    );
    assert!(accurate, "limit error {worst_err:e}");
    assert!(fast, "needed {worst_iter} iterations");
}

#[test]
fn criterion_02_one_dimensional_step_oracle() {
    const TOL: f64 = 1e-12;
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for p in random_1d_params(20) {
        let trace = run_ecm_1d(&p, 0.37, 1e-14, 300).unwrap();
        for w in trace.dummy_values.windows(2) {
            let k = w[0];
            let expected = 1.0
                / (p.vol_cer / (5.0 * p.kappa_cer)
                    + (1.0 - p.vol_cer) / (5.0 * p.kappa_met)
                    + 4.0 / (5.0 * k));
            worst = worst.max(rel(w[1], expected));
        }
    }
    let pass = worst <= TOL;
    report(
        2,
        "1D iterates follow the closed-form map",
        pass,
        start.elapsed(),
        &format!("max rel deviation {worst:.2e}"),
    );
    assert!(pass);
}

#[test]
fn criterion_03_affine_exactness() {
    const TOL: f64 = 1e-9;
    let (lambda0, mu0, l) = (3.0, 1.5, 0.01);
    let nu = lambda0 / (lambda0 + 2.0 * mu0);
    let force0 = ((1.0 - nu) * lambda0 + 2.0 * mu0) * l;
    let mut pass = true;
    let mut detail = String::new();
    let mut elapsed_64 = Duration::ZERO;
    for n in [8, 32, 64] {
        let start = Instant::now();
        let mesh = Mesh2D::new(n).unwrap();
        let field = MaterialField2D::homogeneous(mesh, lambda0, mu0).unwrap();
        let res = TensileSystem::new(&field)
            .unwrap()
            .run(l, &RhsFunctional::Zero, &SolveOptions::default(), None)
            .unwrap();
        elapsed_64 = start.elapsed();
        let exact = DisplacementField::from_fn(mesh, l, |x| [nu * l * (0.5 - x[0]), l * x[1]]);
        let err = h1_diff(&res.displacement, &exact).unwrap();
        let ferr = rel(res.force, force0);
        pass &= err <= TOL && ferr <= TOL;
        detail += &format!("n={n}: H1 err {err:.1e}, force rel err {ferr:.1e}; ");
    }
    pass &= elapsed_64 < Duration::from_secs(10);
    report(3, "2D affine exactness", pass, elapsed_64, &detail);
    assert!(pass);
}

#[test]
fn criterion_04_equivalent_parameter() {
    const TOL_IDENTITY: f64 = 1e-9;
    const TOL_L: f64 = 1e-8;
    let start = Instant::now();
    let mesh = Mesh2D::new(16).unwrap();
    let mu = 0.8;
    let mut worst: f64 = 0.0;
    for lambda in [0.0, 0.5, 2.0, 7.5] {
        let field = MaterialField2D::homogeneous(mesh, lambda, mu).unwrap();
        for l in [0.01, -0.03, 1.0] {
            let f = tensile_force_2d(
                &field,
                &TensileSystem::new(&field)
                    .unwrap()
                    .solve(l, &RhsFunctional::Zero, &SolveOptions::default(), None)
                    .unwrap()
                    .0,
            )
            .unwrap();
            worst = worst.max((lambda_equiv(f, mu, l).unwrap() - lambda).abs() / lambda.max(1.0));
        }
    }
    let p = PhaseParams::perturbed(1.0, 1.0, 0.05, 1.0, 0.5).unwrap();
    let a = run_ecm_2d(&p, 32, 0.01, 1e-8, 1000).unwrap();
    let b = run_ecm_2d(&p, 32, 0.02, 1e-8, 1000).unwrap();
    let l_gap = rel(a.limit(), b.limit());
    let pass = worst <= TOL_IDENTITY && l_gap <= TOL_L && a.converged && b.converged;
    report(
        4,
        "equivalent parameter and l-independence",
        pass,
        start.elapsed(),
        &format!("identity err {worst:.1e}, ECM limit rel gap l=0.01 vs 0.02 {l_gap:.1e}"),
    );
    assert!(pass);
}

/// First-iteration embedded-cell perturbation at `n = 64`, volume 1/2,
/// `D_c = 1`.
fn ecm_perturbation(mesh: Mesh2D) -> (PhaseParams, Vec<f64>) {
    let p = PhaseParams::perturbed(1.0, 1.0, 0.0, 1.0, 0.5).unwrap();
    let g = solve_ecm_radii(p.vol_cer).unwrap();
    let pert = ecm_first_iteration_perturbation(mesh, &p, &g, PhaseAssignment::AreaFraction);
    (p, pert)
}

#[test]
fn criterion_05_second_order_approximation() {
    const MIN_SLOPE_FIRST: f64 = 1.7;
    const ZEROTH: (f64, f64) = (0.8, 1.2);
    let start = Instant::now();
    let mesh = Mesh2D::new(64).unwrap();
    let (p, pert) = ecm_perturbation(mesh);
    let sweep =
        approximation_sweep(mesh, &pert, p.lambda_met, p.mu, 0.01, &[0.02, 0.04, 0.08]).unwrap();
    let elapsed = start.elapsed();
    let s0 = sweep.order0.slope;
    let s1 = sweep.order1.slope;
    let pass = s1 >= MIN_SLOPE_FIRST
        && (ZEROTH.0..=ZEROTH.1).contains(&s0)
        && elapsed < Duration::from_secs(120);
    report(
        5,
        "O(eps^2) approximation",
        pass,
        elapsed,
        &format!("slope u0+eps*u1 {s1:.3}, slope u0 {s0:.3}"),
    );
    assert!(pass);
}

const ECM_EPS: [f64; 3] = [0.02, 0.04, 0.08];

struct EcmSweep {
    floor: f64,
    traces: Vec<(f64, EcmTrace)>,
    params: PhaseParams,
    elapsed: Duration,
}

/// 2D traces shared by the justification and monotonicity checks.
fn ecm_sweep() -> &'static EcmSweep {
    static SWEEP: OnceLock<EcmSweep> = OnceLock::new();
    SWEEP.get_or_init(|| {
        let start = Instant::now();
        let params = PhaseParams::perturbed(1.0, 1.0, 0.0, 1.0, 0.5).unwrap();
        let floor = run_ecm_2d(&params, 64, 0.01, 1e-8, 1000).unwrap().limit() - params.lambda_met;
        let traces = ECM_EPS
            .iter()
            .map(|&eps| {
                let p = params.with_eps(eps).unwrap();
                (eps, run_ecm_2d(&p, 64, 0.01, 1e-8, 1000).unwrap())
            })
            .collect();
        EcmSweep {
            floor,
            traces,
            params,
            elapsed: start.elapsed(),
        }
    })
}

#[test]
fn criterion_06_ecm_justification() {
    const MIN_SLOPE: f64 = 1.7;
    let sweep = ecm_sweep();
    let p = &sweep.params;
    let gaps: Vec<f64> = sweep
        .traces
        .iter()
        .map(|(eps, t)| (t.limit() - sweep.floor - (p.lambda_met + eps * p.vol_cer * p.d_c)).abs())
        .collect();
    let fit = error_order_fit(&ECM_EPS, &gaps).unwrap();
    let converged = sweep.traces.iter().all(|(_, t)| t.converged);
    let pass = fit.slope >= MIN_SLOPE && converged && sweep.elapsed < Duration::from_secs(300);
    report(
        6,
        "ECM limit is second-order close to first-order homogenization",
        pass,
        sweep.elapsed,
        &format!(
            "floor {:.1e}, gaps {:.2e} {:.2e} {:.2e}, slope {:.3}",
            sweep.floor, gaps[0], gaps[1], gaps[2], fit.slope
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_07_monotone_traces() {
    let sweep = ecm_sweep();
    let p = &sweep.params;
    let mut pass = true;
    let mut detail = String::new();
    for (eps, t) in &sweep.traces {
        let q = p.with_eps(*eps).unwrap();
        let r = check_monotone(t, q.lambda_met, q.lambda_cer, 1e-3 * eps);
        pass &= r.is_monotone() && r.contained;
        detail += &format!(
            "eps={eps}: {:?} over {} steps, contained {}; ",
            r.monotonicity, t.iterations, r.contained
        );
    }
    report(
        7,
        "monotone contained ECM traces",
        pass,
        sweep.elapsed,
        &detail,
    );
    assert!(pass);
}

#[test]
fn criterion_08_vanishing_mean() {
    const TOL: f64 = 1e-12;
    let start = Instant::now();
    let mesh = Mesh2D::new(32).unwrap();
    let (p, pert) = ecm_perturbation(mesh);
    let series = series_terms(mesh, &pert, p.lambda_met, p.mu, 0.01, 4).unwrap();
    let worst_corrector = series.terms[1..]
        .iter()
        .map(|u| mean_partial2_u2(u).unwrap().abs())
        .fold(0.0, f64::max);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst_random: f64 = 0.0;
    for _ in 0..50 {
        let mesh = Mesh2D::new(rng.gen_range(1..48)).unwrap();
        let mut u = DisplacementField::zeros(mesh, 0.0);
        for node in 0..mesh.num_nodes() {
            u.u1[node] = rng.gen_range(-1.0..1.0);
            if !mesh.is_top(node) && !mesh.is_bottom(node) {
                u.u2[node] = rng.gen_range(-1.0..1.0);
            }
        }
        worst_random = worst_random.max(mean_partial2_u2(&u).unwrap().abs());
    }
    let pass = worst_corrector <= TOL && worst_random <= TOL;
    report(
        8,
        "vanishing mean of d2 u2",
        pass,
        start.elapsed(),
        &format!("correctors {worst_corrector:.1e}, random fields {worst_random:.1e}"),
    );
    assert!(pass);
}

#[test]
fn criterion_09_stochastic_homogenization() {
    const FINAL_TOL: f64 = 0.05;
    let start = Instant::now();
    let p = PhaseParams::longitudinal(2.0, 6.0, 0.5).unwrap();
    let rows = stochastic_force_experiment(&p, 1.0, &[100, 1000, 10_000], 200, 2024).unwrap();
    let elapsed = start.elapsed();
    let dev: Vec<f64> = rows.iter().map(|r| r.mean_abs_dev).collect();
    let decreasing = dev.windows(2).all(|w| w[1] < w[0]);
    let pass = decreasing && dev[2] <= FINAL_TOL && elapsed < Duration::from_secs(30);
    report(
        9,
        "stochastic homogenization",
        pass,
        elapsed,
        &format!("mean |F - 3| = {:.4} {:.4} {:.4}", dev[0], dev[1], dev[2]),
    );
    assert!(pass);
}

#[test]
fn criterion_10_plasticity_consistency() {
    const TOL: f64 = 1e-8;
    const JUMP_TOL: f64 = 1e-10;
    let start = Instant::now();
    let law = PlasticMetalLaw::new(1.0, 1.0, 1.0).unwrap();
    let kc = 2.0;
    let l_star = yield_displacement(kc, &law);
    let grid: Vec<f64> = (0..20).map(|i| l_star * (0.1 + 0.2 * i as f64)).collect();
    let rows = stress_strain_curve(&grid, kc, &law, 1e-14, 5000).unwrap();
    let worst = rows
        .iter()
        .map(|r| (r.f_ecm - r.f_direct).abs())
        .fold(0.0, f64::max);
    let both = rows.iter().any(|r| r.l < l_star) && rows.iter().any(|r| r.l > l_star);
    let below = solve_stress_strain(l_star * (1.0 - 1e-13), kc, &law).unwrap();
    let above = solve_stress_strain(l_star * (1.0 + 1e-13), kc, &law).unwrap();
    let jump = (above - below).abs();
    let elapsed = start.elapsed();
    let pass = worst <= TOL && jump <= JUMP_TOL && both && elapsed < Duration::from_secs(1);
    report(
        10,
        "plastic ECM reproduces the stress-strain relation",
        pass,
        elapsed,
        &format!("max |F_ecm - F_direct| {worst:.1e}, jump at yield {jump:.1e}"),
    );
    assert!(pass);
}

#[test]
fn criterion_11_delta_sweep() {
    let start = Instant::now();
    let eps = 0.05;
    let p = PhaseParams::perturbed(1.0, 1.0, eps, 1.0, 0.5).unwrap();
    let r = delta_sweep_2d(&p, 0.01, &[1.0, 0.5, 0.25], 16).unwrap();
    let elapsed = start.elapsed();
    let d1 = (r.forces[1] - r.forces[0]).abs();
    let d2 = (r.forces[2] - r.forces[1]).abs();
    let first = p.lambda_met + eps * p.vol_cer * p.d_c;
    let off = (r.lambda_estimate - first).abs();
    let pass = d2 <= d1 && off <= 3.0 * eps * eps && elapsed < Duration::from_secs(300);
    report(
        11,
        "delta sweep trend",
        pass,
        elapsed,
        &format!(
            "force differences {d1:.2e} {d2:.2e}, lambda estimate {:.6} vs {first:.6}",
            r.lambda_estimate
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_12_series_bound() {
    let start = Instant::now();
    let eps = 0.05;
    let mesh = Mesh2D::new(32).unwrap();
    let (p, pert) = ecm_perturbation(mesh);
    let (lambda0, mu0) = (p.lambda_met, p.mu);
    let sup = pert.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    // coercivity of the base form on the trace term gives
    // |u_{k+1}|_a <= sup|pert| / (lambda0 + mu0) |u_k|_a
    let bound = sup / (lambda0 + mu0);
    let series = series_terms(mesh, &pert, lambda0, mu0, 0.01, 5).unwrap();
    let base = MaterialField2D::homogeneous(mesh, lambda0, mu0).unwrap();
    let energy: Vec<f64> = series
        .terms
        .iter()
        .map(|u| energy_norm(&base, u).unwrap())
        .collect();
    let h1: Vec<f64> = series.terms.iter().map(|u| h1_norm(u).unwrap()).collect();
    let energy_ratios: Vec<f64> = (1..=4).map(|k| energy[k + 1] / energy[k]).collect();
    let h1_ratios: Vec<f64> = (1..=4).map(|k| h1[k + 1] / h1[k]).collect();

    let lambda: Vec<f64> = pert.iter().map(|v| lambda0 + eps * v).collect();
    let field = MaterialField2D::new(mesh, lambda, mu0).unwrap();
    let direct = SolveOptions {
        solver: LinearSolver::Cholesky,
        ..SolveOptions::default()
    };
    let (exact, _) = TensileSystem::new(&field)
        .unwrap()
        .solve(0.01, &RhsFunctional::Zero, &direct, None)
        .unwrap();
    let errors: Vec<f64> = (0..=4)
        .map(|m| h1_diff(&exact, &series.partial_sum(eps, m).unwrap()).unwrap())
        .collect();
    let bounded = energy_ratios.iter().chain(&h1_ratios).all(|&r| r <= bound);
    let decreasing = errors.windows(2).all(|w| w[1] < w[0]);
    let pass = bounded && decreasing;
    let fmt = |v: &[f64]| {
        v.iter()
            .map(|x| format!("{x:.3e}"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    report(
        12,
        "power-series growth bound",
        pass,
        start.elapsed(),
        &format!(
            "bound {bound:.3}, energy ratios {}, H1 ratios {}, partial-sum errors {}",
            fmt(&energy_ratios),
            fmt(&h1_ratios),
            fmt(&errors)
        ),
    );
    assert!(pass);
}
