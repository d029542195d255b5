//! Runs an [`Experiment`] and writes its artifacts.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;
use serde::{Deserialize, Serialize};

use ecm_core::ecm::{check_monotone, run_ecm_1d, run_ecm_2d_with, Ecm2dOptions, MonotoneReport};
use ecm_core::elastic1d::{kappa_hom, stochastic_force_experiment};
use ecm_core::fem::Mesh2D;
use ecm_core::geometry::solve_ecm_radii;
use ecm_core::homogenization::{
    compare_ecm_vs_hom, delta_sweep_2d_with, gap_order, homogenize_1d, GapRecord,
    HomogenizationReport, PeriodicForce,
};
use ecm_core::io::{trace_rows, write_csv, write_json, EcmSummary, GapRow};
use ecm_core::material::PhaseParams;
use ecm_core::perturbation::{
    approximation_sweep, ecm_first_iteration_perturbation, ApproximationSweep,
};
use ecm_core::plasticity::{
    run_ecm_plastic, solve_stress_strain, yield_displacement, CurveRow, Regime,
};

use crate::config::{Experiment, ExperimentConfig, OUT_DIR_ENV};

/// How a run finished when no error occurred.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Converged,
    NotConverged,
}

impl Outcome {
    fn from_flag(converged: bool) -> Self {
        if converged {
            Self::Converged
        } else {
            Self::NotConverged
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Ecm1dSummary {
    pub config: Experiment,
    pub ecm: EcmSummary,
    pub force: f64,
    pub kappa_hom: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Ecm2dSummary {
    pub config: Experiment,
    pub ecm: EcmSummary,
    pub force: f64,
    pub monotone: MonotoneReport,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Homogenize1dSummary {
    pub config: Experiment,
    pub kappa_hom: f64,
    pub ecm_limit: f64,
    pub ecm_iterations: usize,
    pub ecm_converged: bool,
    pub gap: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DeltaSweepSummary {
    pub config: Experiment,
    pub reports: Vec<HomogenizationReport>,
    pub ecm: Vec<EcmSummary>,
    pub gaps: Vec<GapRecord>,
    pub gap_slope: f64,
    pub gap_first_order_slope: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DeltaSweepRow {
    pub eps: f64,
    pub delta: f64,
    #[serde(rename = "F_delta")]
    pub f_delta: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct StochasticSummary {
    pub config: Experiment,
    #[serde(rename = "F_hom")]
    pub f_hom: f64,
    pub final_abs_err: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PlasticSummary {
    pub config: Experiment,
    pub yield_displacement: f64,
    pub yield_force: f64,
    pub max_abs_diff: f64,
    pub all_converged: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PerturbSummary {
    pub config: Experiment,
    pub sweep: ApproximationSweep,
}

/// One row of the slope file: the ansatz and its fitted order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeRow {
    pub ansatz: String,
    pub expected_order: u32,
    pub slope: f64,
}

/// `--out`, else `$ECM_OUT_DIR/<command>-<timestamp>`, else the same under
/// the working directory.
pub fn output_dir(config: &ExperimentConfig) -> PathBuf {
    if let Some(out) = &config.out {
        return out.clone();
    }
    let base = std::env::var_os(OUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."));
    let stamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0);
    base.join(format!("{}-{stamp}", config.experiment.name()))
}

pub fn run_experiment(config: &ExperimentConfig) -> anyhow::Result<Outcome> {
    let dir = output_dir(config);
    fs::create_dir_all(&dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))?;
    let exp = config.experiment.clone();
    let outcome = match &exp {
        Experiment::Ecm1d {
            params,
            l,
            tol,
            max_iter,
        } => {
            let trace = run_ecm_1d(params, *l, *tol, *max_iter)?;
            let summary = Ecm1dSummary {
                ecm: EcmSummary::from(&trace),
                force: trace.last_force().unwrap_or(0.0),
                kappa_hom: kappa_hom(params),
                config: exp.clone(),
            };
            write_csv(&dir.join("trace.csv"), &trace_rows(&trace))?;
            write_json(&dir.join("summary.json"), &summary)?;
            println!(
                "kappa_dummy = {:.12} (kappa_hom = {:.12}), force = {:.6e}, {} iterations",
                trace.limit(),
                summary.kappa_hom,
                summary.force,
                trace.iterations
            );
            Outcome::from_flag(trace.converged)
        }
        Experiment::Ecm2d {
            params,
            l,
            tol,
            max_iter,
            mesh_n,
            assignment,
        } => {
            let opts = Ecm2dOptions {
                tol: *tol,
                max_iter: *max_iter,
                assignment: *assignment,
                ..Default::default()
            };
            let trace = run_ecm_2d_with(params, *mesh_n, *l, &opts)?;
            let summary = Ecm2dSummary {
                ecm: EcmSummary::from(&trace),
                force: trace.last_force().unwrap_or(0.0),
                monotone: check_monotone(&trace, params.lambda_met, params.lambda_cer, 0.0),
                config: exp.clone(),
            };
            write_csv(&dir.join("trace.csv"), &trace_rows(&trace))?;
            write_json(&dir.join("summary.json"), &summary)?;
            println!(
                "lambda_dummy = {:.12}, force = {:.6e}, {} iterations",
                trace.limit(),
                summary.force,
                trace.iterations
            );
            Outcome::from_flag(trace.converged)
        }
        Experiment::Homogenize1d {
            params,
            l,
            tol,
            max_iter,
            n_periods,
        } => {
            let r = homogenize_1d(params, *l, n_periods, *tol, *max_iter)?;
            write_csv::<PeriodicForce>(&dir.join("periodic.csv"), &r.periodic)?;
            write_json(
                &dir.join("summary.json"),
                &Homogenize1dSummary {
                    config: exp.clone(),
                    kappa_hom: r.kappa_hom,
                    ecm_limit: r.ecm_limit,
                    ecm_iterations: r.ecm_iterations,
                    ecm_converged: r.ecm_converged,
                    gap: r.gap,
                },
            )?;
            println!(
                "kappa_hom = {:.12}, ECM limit = {:.12}, gap = {:.3e}",
                r.kappa_hom, r.ecm_limit, r.gap
            );
            Outcome::from_flag(r.ecm_converged)
        }
        Experiment::Deltasweep2d {
            params,
            l,
            tol,
            max_iter,
            mesh_n,
            eps_list,
            deltas,
            mesh_per_period,
            assignment,
        } => run_delta_sweep(
            &dir,
            &exp,
            params,
            *l,
            eps_list,
            deltas,
            *mesh_per_period,
            &Ecm2dOptions {
                tol: *tol,
                max_iter: *max_iter,
                assignment: *assignment,
                ..Default::default()
            },
            *mesh_n,
        )?,
        Experiment::Stochastic1d {
            params,
            l,
            n_cells,
            samples,
            seed,
        } => {
            let rows = stochastic_force_experiment(params, *l, n_cells, *samples, *seed)?;
            write_csv(&dir.join("stochastic.csv"), &rows)?;
            let last = rows.last().expect("n_cells is non-empty");
            write_json(
                &dir.join("summary.json"),
                &StochasticSummary {
                    config: exp.clone(),
                    f_hom: last.f_hom,
                    final_abs_err: last.abs_err,
                },
            )?;
            for r in &rows {
                println!(
                    "n_cells = {:>6}: mean F = {:.6}, std F = {:.3e}, |mean F - F_hom| = {:.3e}",
                    r.n_cells, r.mean_f, r.std_f, r.abs_err
                );
            }
            Outcome::Converged
        }
        Experiment::Plastic1d {
            kappa_cer,
            law,
            l_grid,
            tol,
            max_iter,
        } => {
            let l_star = yield_displacement(*kappa_cer, law);
            let mut rows = Vec::with_capacity(l_grid.len());
            let mut all_converged = true;
            for &l in l_grid {
                let ecm = run_ecm_plastic(*kappa_cer, law, l, *tol, *max_iter)?;
                all_converged &= ecm.trace.converged;
                rows.push(CurveRow {
                    l,
                    f_direct: solve_stress_strain(l, *kappa_cer, law)?,
                    f_ecm: ecm.force,
                    regime: if l <= l_star {
                        Regime::Elastic
                    } else {
                        Regime::Plastic
                    },
                });
            }
            let max_abs_diff = rows
                .iter()
                .map(|r| (r.f_ecm - r.f_direct).abs())
                .fold(0.0, f64::max);
            write_csv(&dir.join("curve.csv"), &rows)?;
            write_json(
                &dir.join("summary.json"),
                &PlasticSummary {
                    config: exp.clone(),
                    yield_displacement: l_star,
                    yield_force: law.yield_force(),
                    max_abs_diff,
                    all_converged,
                },
            )?;
            println!(
                "yield at l = {l_star:.6}, max |F_ecm - F_direct| = {max_abs_diff:.3e} over {} points",
                rows.len()
            );
            Outcome::from_flag(all_converged)
        }
        Experiment::Perturb2d {
            params,
            l,
            mesh_n,
            eps_list,
            assignment,
        } => {
            let mesh = Mesh2D::new(*mesh_n)?;
            let geometry = solve_ecm_radii(params.vol_cer)?;
            let pert = ecm_first_iteration_perturbation(mesh, params, &geometry, *assignment);
            let sweep =
                approximation_sweep(mesh, &pert, params.lambda_met, params.mu, *l, eps_list)?;
            let slopes = vec![
                SlopeRow {
                    ansatz: "u0".into(),
                    expected_order: 1,
                    slope: sweep.order0.slope,
                },
                SlopeRow {
                    ansatz: "u0+eps*u1".into(),
                    expected_order: 2,
                    slope: sweep.order1.slope,
                },
            ];
            write_csv(&dir.join("errors.csv"), &sweep.rows)?;
            write_csv(&dir.join("slopes.csv"), &slopes)?;
            println!(
                "slope u0 = {:.4}, slope u0 + eps u1 = {:.4}",
                sweep.order0.slope, sweep.order1.slope
            );
            write_json(
                &dir.join("summary.json"),
                &PerturbSummary {
                    config: exp.clone(),
                    sweep,
                },
            )?;
            Outcome::Converged
        }
    };
    println!("artifacts written to {}", dir.display());
    Ok(outcome)
}

#[allow(clippy::too_many_arguments)]
fn run_delta_sweep(
    dir: &Path,
    exp: &Experiment,
    params: &PhaseParams,
    l: f64,
    eps_list: &[f64],
    deltas: &[f64],
    mesh_per_period: usize,
    opts: &Ecm2dOptions,
    mesh_n: usize,
) -> anyhow::Result<Outcome> {
    let mut reports = Vec::new();
    let mut ecm = Vec::new();
    let mut gaps = Vec::new();
    for &eps in eps_list {
        let p = params.with_eps(eps)?;
        let report = delta_sweep_2d_with(&p, l, deltas, mesh_per_period, opts.assignment)?;
        let trace = run_ecm_2d_with(&p, mesh_n, l, opts)?;
        gaps.push(compare_ecm_vs_hom(&trace, &report));
        ecm.push(EcmSummary::from(&trace));
        reports.push(report);
    }
    let gap_slope = gap_order(&gaps, |g| g.gap)?.slope;
    let gap_first_order_slope = gap_order(&gaps, |g| g.gap_first_order)?.slope;
    let delta_rows: Vec<DeltaSweepRow> = reports
        .iter()
        .flat_map(|r| {
            r.deltas
                .iter()
                .zip(&r.forces)
                .map(|(&delta, &f_delta)| DeltaSweepRow {
                    eps: r.eps,
                    delta,
                    f_delta,
                })
        })
        .collect();
    let gap_rows: Vec<GapRow> = gaps
        .iter()
        .map(|g| GapRow {
            eps: g.eps,
            gap: g.gap,
            fitted_slope: gap_slope,
        })
        .collect();
    write_csv(&dir.join("deltas.csv"), &delta_rows)?;
    write_csv(&dir.join("gaps.csv"), &gap_rows)?;
    for g in &gaps {
        println!(
            "eps = {}: lambda_hom estimate = {:.9}, ECM limit = {:.9}, gap = {:.3e}",
            g.eps, g.lambda_hom_estimate, g.ecm_limit, g.gap
        );
    }
    println!("fitted gap slope = {gap_slope:.4}");
    let converged = ecm.iter().all(|e| e.converged);
    write_json(
        &dir.join("summary.json"),
        &DeltaSweepSummary {
            config: exp.clone(),
            reports,
            ecm,
            gaps,
            gap_slope,
            gap_first_order_slope,
        },
    )?;
    Ok(Outcome::from_flag(converged))
}
