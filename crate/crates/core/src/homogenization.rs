//! Reference values for the embedded cell iterations: the 1D harmonic mean,
//! the first-order 2D effective Lamé parameter and a period-refinement sweep
//! over periodic disk arrays.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ecm::{homogeneous_force, lambda_equiv, run_ecm_1d, EcmTrace};
use crate::elastic1d::{kappa_hom, solve_tensile_1d, tensile_force_1d};
use crate::error::{EcmError, Result};
use crate::fem::{LinearSolver, Mesh2D, RhsFunctional, SolveOptions, TensileSystem};
use crate::material::{
    build_periodic_kappa_1d, build_periodic_lambda_2d_with, periods_per_side, PhaseAssignment,
    PhaseParams,
};
use crate::perturbation::{error_order_fit, OrderFit};

/// `λ_met + ε vol_cer D_c`.
pub fn lambda_hom_first_order(params: &PhaseParams) -> f64 {
    params.lambda_met + params.eps * params.vol_cer * params.d_c
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomogenizationReport {
    pub eps: f64,
    pub mu: f64,
    pub l: f64,
    pub deltas: Vec<f64>,
    pub forces: Vec<f64>,
    /// Richardson value from the last two forces, assuming first order in δ.
    pub extrapolated_force: f64,
    /// Equivalent `λ` of the extrapolated force.
    pub lambda_estimate: f64,
    pub lambda_hom_first_order: f64,
}

/// Tensile tests on periodic disk arrays of decreasing period.
pub fn delta_sweep_2d(
    params: &PhaseParams,
    l: f64,
    deltas: &[f64],
    mesh_per_period: usize,
) -> Result<HomogenizationReport> {
    delta_sweep_2d_with(
        params,
        l,
        deltas,
        mesh_per_period,
        PhaseAssignment::Centroid,
    )
}

pub fn delta_sweep_2d_with(
    params: &PhaseParams,
    l: f64,
    deltas: &[f64],
    mesh_per_period: usize,
    assignment: PhaseAssignment,
) -> Result<HomogenizationReport> {
    params.validate()?;
    if deltas.is_empty() {
        return Err(EcmError::invalid("deltas", "need at least one period"));
    }
    if deltas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(EcmError::invalid("deltas", "must be strictly decreasing"));
    }
    let opts = SolveOptions {
        solver: LinearSolver::Cholesky,
        ..SolveOptions::default()
    };
    let forces: Vec<f64> = deltas
        .par_iter()
        .map(|&delta| {
            let k = periods_per_side(delta)?;
            let mesh = Mesh2D::new(k * mesh_per_period)?;
            let field =
                build_periodic_lambda_2d_with(mesh, params, delta, params.vol_cer, assignment)?;
            Ok(TensileSystem::new(&field)?
                .run(l, &RhsFunctional::Zero, &opts, None)?
                .force)
        })
        .collect::<Result<_>>()?;
    let extrapolated_force = match (deltas, forces.as_slice()) {
        ([.., d_prev, d_last], [.., f_prev, f_last]) => {
            f_last + (f_last - f_prev) * d_last / (d_prev - d_last)
        }
        _ => forces[0],
    };
    Ok(HomogenizationReport {
        eps: params.eps,
        mu: params.mu,
        l,
        deltas: deltas.to_vec(),
        lambda_estimate: lambda_equiv(extrapolated_force, params.mu, l)?,
        lambda_hom_first_order: lambda_hom_first_order(params),
        extrapolated_force,
        forces,
    })
}

/// Distance between an embedded-cell limit and the homogenization references.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapRecord {
    pub eps: f64,
    pub ecm_limit: f64,
    pub lambda_hom_estimate: f64,
    pub lambda_hom_first_order: f64,
    /// `|λ_hom_estimate - ecm_limit|`.
    pub gap: f64,
    /// `|F[λ_hom_estimate] - F[ecm_limit]|` for homogeneous bodies.
    pub force_gap: f64,
    /// `|λ_hom_first_order - ecm_limit|`.
    pub gap_first_order: f64,
}

pub fn compare_ecm_vs_hom(ecm: &EcmTrace, report: &HomogenizationReport) -> GapRecord {
    let limit = ecm.limit();
    GapRecord {
        eps: report.eps,
        ecm_limit: limit,
        lambda_hom_estimate: report.lambda_estimate,
        lambda_hom_first_order: report.lambda_hom_first_order,
        gap: (report.lambda_estimate - limit).abs(),
        force_gap: (homogeneous_force(report.lambda_estimate, report.mu, report.l)
            - homogeneous_force(limit, report.mu, report.l))
        .abs(),
        gap_first_order: (report.lambda_hom_first_order - limit).abs(),
    }
}

/// Order of a gap in `ε` from records at three or more perturbation sizes.
pub fn gap_order(records: &[GapRecord], gap: impl Fn(&GapRecord) -> f64) -> Result<OrderFit> {
    let eps: Vec<f64> = records.iter().map(|r| r.eps).collect();
    let gaps: Vec<f64> = records.iter().map(gap).collect();
    error_order_fit(&eps, &gaps)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicForce {
    pub n_periods: usize,
    pub force: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Homogenization1DReport {
    pub kappa_hom: f64,
    pub periodic: Vec<PeriodicForce>,
    pub ecm_limit: f64,
    pub ecm_iterations: usize,
    pub ecm_converged: bool,
    /// `|κ_hom - ecm_limit|`.
    pub gap: f64,
}

/// 1D counterpart: periodic rods, the harmonic mean and the ECM limit.
pub fn homogenize_1d(
    params: &PhaseParams,
    l: f64,
    n_periods_list: &[usize],
    tol: f64,
    max_iter: usize,
) -> Result<Homogenization1DReport> {
    let periodic = n_periods_list
        .iter()
        .map(|&n_periods| {
            let field = build_periodic_kappa_1d(params, n_periods)?;
            Ok(PeriodicForce {
                n_periods,
                force: tensile_force_1d(&solve_tensile_1d(&field, l)),
            })
        })
        .collect::<Result<_>>()?;
    let trace = run_ecm_1d(params, l, tol, max_iter)?;
    let k = kappa_hom(params);
    Ok(Homogenization1DReport {
        kappa_hom: k,
        periodic,
        ecm_limit: trace.limit(),
        ecm_iterations: trace.iterations,
        ecm_converged: trace.converged,
        gap: (k - trace.limit()).abs(),
    })
}
