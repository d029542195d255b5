//! Small-contrast expansion of the tensile test.
//!
//! For `λ = λ0 + ε λ_pert` the displacement expands as `Σ ε^k u_k` where
//! `u0` is the affine homogeneous solution and every corrector solves the
//! constant-coefficient problem with a right-hand side built from its
//! predecessor.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{EcmError, Result};
use crate::fem::{
    h1_diff, DisplacementField, LinearSolver, Mesh2D, RhsFunctional, SolveOptions, TensileSystem,
};
use crate::geometry::EmbeddedCellGeometry2D;
use crate::material::{cell_fractions, MaterialField2D, PhaseAssignment, PhaseParams};

/// Contraction ratio `λ0 / (λ0 + 2 μ0)`.
pub fn poisson_ratio(lambda0: f64, mu0: f64) -> f64 {
    lambda0 / (lambda0 + 2.0 * mu0)
}

/// Nodal values of `u0(x) = diag(-ν0 l, l) x + (ν0 l / 2, 0)`.
pub fn u0_exact(mesh: Mesh2D, lambda0: f64, mu0: f64, l: f64) -> Result<DisplacementField> {
    check_base(lambda0, mu0)?;
    let nu = poisson_ratio(lambda0, mu0);
    Ok(DisplacementField::from_fn(mesh, l, |x| {
        [-nu * l * x[0] + 0.5 * nu * l, l * x[1]]
    }))
}

fn check_base(lambda0: f64, mu0: f64) -> Result<()> {
    if !(lambda0 >= 0.0 && lambda0.is_finite()) {
        return Err(EcmError::invalid(
            "lambda0",
            "must be non-negative and finite",
        ));
    }
    if !(mu0 > 0.0 && mu0.is_finite()) {
        return Err(EcmError::invalid("mu0", "must be positive and finite"));
    }
    Ok(())
}

/// Direct solver options used throughout this module.
fn direct() -> SolveOptions {
    SolveOptions {
        solver: LinearSolver::Cholesky,
        ..SolveOptions::default()
    }
}

/// Constant-coefficient operator, factored once and shared by all
/// correctors.
pub struct CorrectorSolver {
    system: TensileSystem,
    lambda0: f64,
    mu0: f64,
}

impl CorrectorSolver {
    pub fn new(mesh: Mesh2D, lambda0: f64, mu0: f64) -> Result<Self> {
        check_base(lambda0, mu0)?;
        let field = MaterialField2D::homogeneous(mesh, lambda0, mu0)?;
        Ok(Self {
            system: TensileSystem::new(&field)?,
            lambda0,
            mu0,
        })
    }

    pub fn mesh(&self) -> Mesh2D {
        self.system.mesh()
    }

    /// Zero-data solution driven by `(λ_pert, μ_pert)` acting on `u_prev`.
    pub fn corrector(
        &self,
        lambda_pert: &[f64],
        mu_pert: &[f64],
        u_prev: &DisplacementField,
    ) -> Result<DisplacementField> {
        let rhs = RhsFunctional::source(lambda_pert.to_vec(), mu_pert.to_vec(), u_prev.clone())?;
        Ok(self.system.solve(0.0, &rhs, &direct(), None)?.0)
    }

    pub fn u0(&self, l: f64) -> Result<DisplacementField> {
        u0_exact(self.mesh(), self.lambda0, self.mu0, l)
    }
}

/// First corrector for the perturbation `(λ_pert, μ_pert)` of `(λ0, μ0)`.
pub fn solve_u1(
    mesh: Mesh2D,
    lambda_pert: &[f64],
    mu_pert: &[f64],
    lambda0: f64,
    mu0: f64,
    u_prev: &DisplacementField,
) -> Result<DisplacementField> {
    CorrectorSolver::new(mesh, lambda0, mu0)?.corrector(lambda_pert, mu_pert, u_prev)
}

/// Terms `u0 .. u_m` of the expansion for a perturbation of `λ` only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesExpansion {
    pub terms: Vec<DisplacementField>,
}

impl SeriesExpansion {
    pub fn order(&self) -> usize {
        self.terms.len() - 1
    }

    /// `Σ_{k <= m} ε^k u_k`.
    pub fn partial_sum(&self, eps: f64, m: usize) -> Result<DisplacementField> {
        if m > self.order() {
            return Err(EcmError::invalid(
                "m",
                format!("series only has order {}", self.order()),
            ));
        }
        let mut sum = self.terms[0].clone();
        let mut factor = 1.0;
        for term in &self.terms[1..=m] {
            factor *= eps;
            sum = sum.add_scaled(factor, term)?;
        }
        Ok(sum)
    }
}

pub fn series_terms(
    mesh: Mesh2D,
    lambda_pert: &[f64],
    lambda0: f64,
    mu0: f64,
    l: f64,
    m: usize,
) -> Result<SeriesExpansion> {
    let solver = CorrectorSolver::new(mesh, lambda0, mu0)?;
    let zero_mu = vec![0.0; mesh.num_elements()];
    let mut terms = vec![solver.u0(l)?];
    for _ in 0..m {
        let next = solver.corrector(lambda_pert, &zero_mu, terms.last().unwrap())?;
        terms.push(next);
    }
    Ok(SeriesExpansion { terms })
}

/// Value substituted for non-positive errors before taking logarithms.
pub const ERROR_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderFit {
    pub slope: f64,
    pub intercept: f64,
    /// Entries replaced by [`ERROR_FLOOR`].
    pub floored: Vec<bool>,
}

/// Least-squares slope of `log(error)` against `log(eps)`.
pub fn error_order_fit(eps: &[f64], errors: &[f64]) -> Result<OrderFit> {
    if eps.len() != errors.len() {
        return Err(EcmError::Shape(format!(
            "{} eps values for {} errors",
            eps.len(),
            errors.len()
        )));
    }
    if eps.len() < 3 {
        return Err(EcmError::invalid(
            "eps",
            "an order fit needs at least 3 points",
        ));
    }
    if eps.iter().any(|&e| !(e > 0.0)) {
        return Err(EcmError::invalid("eps", "values must be positive"));
    }
    let floored: Vec<bool> = errors.iter().map(|&e| !(e > 0.0)).collect();
    let xs: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = errors
        .iter()
        .map(|&e| if e > 0.0 { e } else { ERROR_FLOOR }.ln())
        .collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(EcmError::invalid("eps", "values must not all be equal"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok(OrderFit {
        slope,
        intercept: my - slope * mx,
        floored,
    })
}

/// Affine corrector for constant perturbations `(λ̄, μ̄)`, normalised to zero
/// mean in the first component.
pub fn u1_hom_exact(
    lambda_bar: f64,
    mu_bar: f64,
    lambda0: f64,
    mu0: f64,
    l: f64,
    mesh: Mesh2D,
) -> Result<DisplacementField> {
    check_base(lambda0, mu0)?;
    let nu = poisson_ratio(lambda0, mu0);
    let p = (lambda_bar * (1.0 - nu) * l - 2.0 * mu_bar * nu * l) / (2.0 * (lambda0 + 2.0 * mu0));
    Ok(DisplacementField::from_fn(mesh, 0.0, |x| {
        [-2.0 * p * x[0] + p, 0.0]
    }))
}

/// Base force `((1 - ν0) λ0 + 2 μ0) l`.
pub fn zeroth_order_force(lambda0: f64, mu0: f64, l: f64) -> f64 {
    ((1.0 - poisson_ratio(lambda0, mu0)) * lambda0 + 2.0 * mu0) * l
}

/// First-order force coefficient `(1 - ν0)^2 l ∫ λ_pert`.
pub fn first_order_force(lambda0: f64, mu0: f64, l: f64, lambda_pert_integral: f64) -> f64 {
    (1.0 - poisson_ratio(lambda0, mu0)).powi(2) * l * lambda_pert_integral
}

/// Perturbation of the first embedded-cell material: the cell and dummy
/// regions carry `λ_met + ε λ_pert` with `λ_pert = D_c` on the ceramic,
/// `0` on the metal and `vol_cer D_c` on the dummy.
pub fn ecm_first_iteration_perturbation(
    mesh: Mesh2D,
    params: &PhaseParams,
    geometry: &EmbeddedCellGeometry2D,
    assignment: PhaseAssignment,
) -> Vec<f64> {
    cell_fractions(mesh, geometry, assignment)
        .into_iter()
        .map(|[cer, _, dummy]| params.d_c * (cer + params.vol_cer * dummy))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproximationRow {
    pub eps: f64,
    pub h1_error_order0: f64,
    pub h1_error_order1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproximationSweep {
    pub rows: Vec<ApproximationRow>,
    pub order0: OrderFit,
    pub order1: OrderFit,
}

/// Compares the direct solution for `λ0 + ε λ_pert` with `u0` and
/// `u0 + ε u1` for each `ε`.
pub fn approximation_sweep(
    mesh: Mesh2D,
    lambda_pert: &[f64],
    lambda0: f64,
    mu0: f64,
    l: f64,
    eps_list: &[f64],
) -> Result<ApproximationSweep> {
    let series = series_terms(mesh, lambda_pert, lambda0, mu0, l, 1)?;
    let rows: Vec<ApproximationRow> = eps_list
        .par_iter()
        .map(|&eps| {
            let lambda: Vec<f64> = lambda_pert.iter().map(|p| lambda0 + eps * p).collect();
            let field = MaterialField2D::new(mesh, lambda, mu0)?;
            let (direct_u, _) =
                TensileSystem::new(&field)?.solve(l, &RhsFunctional::Zero, &direct(), None)?;
            Ok(ApproximationRow {
                eps,
                h1_error_order0: h1_diff(&direct_u, &series.partial_sum(eps, 0)?)?,
                h1_error_order1: h1_diff(&direct_u, &series.partial_sum(eps, 1)?)?,
            })
        })
        .collect::<Result<_>>()?;
    let errs0: Vec<f64> = rows.iter().map(|r| r.h1_error_order0).collect();
    let errs1: Vec<f64> = rows.iter().map(|r| r.h1_error_order1).collect();
    Ok(ApproximationSweep {
        order0: error_order_fit(eps_list, &errs0)?,
        order1: error_order_fit(eps_list, &errs1)?,
        rows,
    })
}
