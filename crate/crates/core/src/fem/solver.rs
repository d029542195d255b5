//! Galerkin solve of the plane-stress tensile test.
//!
//! Unknowns are all dofs except `u2` on the bottom and top edges (Dirichlet)
//! and `u1` at node 0, which is pinned to remove the horizontal translation.
//! After the solve, `u1` is shifted to zero mean; since both the bilinear
//! form and every admissible right-hand side ignore such shifts, the result
//! is the unique zero-mean solution.

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::element::reference_matrices;
use super::field::{DisplacementField, RhsFunctional};
use super::mesh::Mesh2D;
use super::post::tensile_force_2d;
use super::sparse::{norm, pcg, BandCholesky, CsrMatrix, SolveStats};
use crate::error::{EcmError, Result};
use crate::material::MaterialField2D;

/// Relative residual bound of the reduced linear system.
pub const DEFAULT_RTOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinearSolver {
    /// Jacobi-preconditioned conjugate gradients.
    #[default]
    Pcg,
    /// Banded Cholesky, factored once per system and reused.
    Cholesky,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub rtol: f64,
    /// Defaults to ten times the number of unknowns.
    pub max_iter: Option<usize>,
    pub solver: LinearSolver,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            rtol: DEFAULT_RTOL,
            max_iter: None,
            solver: LinearSolver::Pcg,
        }
    }
}

/// Solved tensile test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensileResult {
    pub displacement: DisplacementField,
    pub force: f64,
    pub stats: SolveStats,
}

/// Reduced stiffness system of one material field, reusable across loads.
pub struct TensileSystem {
    mesh: Mesh2D,
    field: MaterialField2D,
    reduced_index: Vec<Option<usize>>,
    free_dofs: Vec<usize>,
    matrix: CsrMatrix,
    factor: OnceLock<Result<BandCholesky>>,
}

impl TensileSystem {
    pub fn new(field: &MaterialField2D) -> Result<Self> {
        let mesh = field.mesh();
        let mut reduced_index = vec![None; mesh.num_dofs()];
        let mut free_dofs = Vec::with_capacity(mesh.num_dofs());
        for p in 0..mesh.num_nodes() {
            for c in 0..2 {
                let fixed = if c == 0 {
                    p == 0
                } else {
                    mesh.is_bottom(p) || mesh.is_top(p)
                };
                if !fixed {
                    reduced_index[2 * p + c] = Some(free_dofs.len());
                    free_dofs.push(2 * p + c);
                }
            }
        }
        let matrix = assemble_reduced(&mesh, field, &reduced_index, &free_dofs);
        Ok(Self {
            mesh,
            field: field.clone(),
            reduced_index,
            free_dofs,
            matrix,
            factor: OnceLock::new(),
        })
    }

    pub fn mesh(&self) -> Mesh2D {
        self.mesh
    }

    pub fn field(&self) -> &MaterialField2D {
        &self.field
    }

    pub fn num_unknowns(&self) -> usize {
        self.free_dofs.len()
    }

    /// `K u` over all dofs, element by element.
    pub fn apply_full(&self, u: &[f64]) -> Vec<f64> {
        let mesh = &self.mesh;
        let r = reference_matrices();
        let mu = self.field.mu();
        let mut out = vec![0.0; mesh.num_dofs()];
        for (e, &lam) in self.field.lambda().iter().enumerate() {
            let dofs = mesh.element_dofs(e);
            for p in 0..8 {
                let mut s = 0.0;
                for q in 0..8 {
                    s += (lam * r.k_lambda[p][q] + mu * r.k_mu[p][q]) * u[dofs[q]];
                }
                out[dofs[p]] += s;
            }
        }
        out
    }

    fn factor(&self) -> Result<&BandCholesky> {
        self.factor
            .get_or_init(|| BandCholesky::factor(&self.matrix))
            .as_ref()
            .map_err(Clone::clone)
    }

    /// Solves for top displacement `l` and right-hand side `rhs`.
    ///
    /// `warm` seeds the iterative solver; it is ignored by the direct one.
    pub fn solve(
        &self,
        l: f64,
        rhs: &RhsFunctional,
        opts: &SolveOptions,
        warm: Option<&DisplacementField>,
    ) -> Result<(DisplacementField, SolveStats)> {
        let mesh = &self.mesh;
        if !l.is_finite() {
            return Err(EcmError::invalid("l", "must be finite"));
        }
        if !(opts.rtol > 0.0) {
            return Err(EcmError::invalid("rtol", "must be positive"));
        }
        let mut full = vec![0.0; mesh.num_dofs()];
        for p in 0..mesh.num_nodes() {
            if mesh.is_top(p) {
                full[2 * p + 1] = l;
            }
        }
        let load = rhs.load_vector(mesh)?;
        let lifted = self.apply_full(&full);
        let b: Vec<f64> = self
            .free_dofs
            .iter()
            .map(|&d| load[d] - lifted[d])
            .collect();

        let mut x = vec![0.0; b.len()];
        let stats = match opts.solver {
            LinearSolver::Pcg => {
                if let Some(w) = warm.filter(|w| w.mesh_n == mesh.n()) {
                    let shift = w.u1[0];
                    for (k, &d) in self.free_dofs.iter().enumerate() {
                        let p = d / 2;
                        x[k] = if d % 2 == 0 { w.u1[p] - shift } else { w.u2[p] };
                    }
                }
                let max_iter = opts.max_iter.unwrap_or(10 * b.len());
                pcg(&self.matrix, &b, &mut x, opts.rtol, max_iter)?
            }
            LinearSolver::Cholesky => {
                x.copy_from_slice(&b);
                self.factor()?.solve_in_place(&mut x);
                let mut ax = vec![0.0; b.len()];
                self.matrix.mul_vec(&x, &mut ax);
                let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
                let bn = norm(&b);
                let res = if bn > 0.0 { norm(&r) / bn } else { 0.0 };
                if res > opts.rtol {
                    return Err(EcmError::SolverNotConverged {
                        iterations: 1,
                        residual: res,
                    });
                }
                SolveStats {
                    iterations: 1,
                    relative_residual: res,
                }
            }
        };

        for (k, &d) in self.free_dofs.iter().enumerate() {
            full[d] = x[k];
        }
        let mut u = DisplacementField::from_dofs(*mesh, l, &full);
        remove_u1_mean(mesh, &mut u);
        Ok((u, stats))
    }

    /// Solves and evaluates the tensile force.
    pub fn run(
        &self,
        l: f64,
        rhs: &RhsFunctional,
        opts: &SolveOptions,
        warm: Option<&DisplacementField>,
    ) -> Result<TensileResult> {
        let (displacement, stats) = self.solve(l, rhs, opts, warm)?;
        let force = tensile_force_2d(&self.field, &displacement)?;
        Ok(TensileResult {
            displacement,
            force,
            stats,
        })
    }

    /// `|| K u - b ||` restricted to the unconstrained rows, including the
    /// pinned one, relative to `|| b ||` (or absolute when `b = 0`).
    pub fn residual(&self, u: &DisplacementField, rhs: &RhsFunctional) -> Result<f64> {
        let load = rhs.load_vector(&self.mesh)?;
        let ku = self.apply_full(&u.to_dofs());
        let free_rows = |d: usize| self.reduced_index[d].is_some() || d == 0;
        let (mut r2, mut b2) = (0.0, 0.0);
        for d in (0..self.mesh.num_dofs()).filter(|&d| free_rows(d)) {
            r2 += (ku[d] - load[d]).powi(2);
            b2 += load[d].powi(2);
        }
        Ok(if b2 > 0.0 {
            (r2 / b2).sqrt()
        } else {
            r2.sqrt()
        })
    }
}

/// Parallel row gather; each row reads its (at most four) neighbouring
/// elements, so the result does not depend on scheduling.
fn assemble_reduced(
    mesh: &Mesh2D,
    field: &MaterialField2D,
    reduced_index: &[Option<usize>],
    free_dofs: &[usize],
) -> CsrMatrix {
    let r = reference_matrices();
    let n = mesh.n();
    let mu = field.mu();
    let lambda = field.lambda();
    let rows: Vec<Vec<(usize, f64)>> = free_dofs
        .par_iter()
        .map(|&d| {
            let (p, c) = (d / 2, d % 2);
            let (i, j) = mesh.node_ij(p);
            let mut row = Vec::with_capacity(18);
            for ej in j.saturating_sub(1)..=j.min(n - 1) {
                for ei in i.saturating_sub(1)..=i.min(n - 1) {
                    let e = ej * n + ei;
                    let nodes = mesh.element_nodes(e);
                    let a = nodes.iter().position(|&q| q == p).expect("node of element");
                    let lr = 2 * a + c;
                    let dofs = mesh.element_dofs(e);
                    for (q, &g) in dofs.iter().enumerate() {
                        if let Some(col) = reduced_index[g] {
                            row.push((col, lambda[e] * r.k_lambda[lr][q] + mu * r.k_mu[lr][q]));
                        }
                    }
                }
            }
            row
        })
        .collect();
    CsrMatrix::from_rows(free_dofs.len(), rows)
}

fn remove_u1_mean(mesh: &Mesh2D, u: &mut DisplacementField) {
    let mean: f64 = mesh
        .node_weights()
        .iter()
        .zip(&u.u1)
        .map(|(w, v)| w * v)
        .sum();
    u.u1.iter_mut().for_each(|v| *v -= mean);
}

/// Zero-mean Galerkin solution with default solver settings.
pub fn solve_tensile_2d(
    mesh: Mesh2D,
    field: &MaterialField2D,
    l: f64,
    rhs: &RhsFunctional,
) -> Result<DisplacementField> {
    check_field_mesh(mesh, field)?;
    let system = TensileSystem::new(field)?;
    Ok(system.solve(l, rhs, &SolveOptions::default(), None)?.0)
}

/// Solve plus force and solver statistics.
pub fn solve_tensile_2d_with(
    mesh: Mesh2D,
    field: &MaterialField2D,
    l: f64,
    rhs: &RhsFunctional,
    opts: &SolveOptions,
) -> Result<TensileResult> {
    check_field_mesh(mesh, field)?;
    TensileSystem::new(field)?.run(l, rhs, opts, None)
}

fn check_field_mesh(mesh: Mesh2D, field: &MaterialField2D) -> Result<()> {
    if field.mesh_n() != mesh.n() {
        return Err(EcmError::Shape(format!(
            "material on mesh n = {} used with mesh n = {}",
            field.mesh_n(),
            mesh.n()
        )));
    }
    Ok(())
}
