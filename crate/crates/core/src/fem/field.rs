use serde::{Deserialize, Serialize};

use super::element::reference_matrices;
use super::mesh::Mesh2D;
use crate::error::{EcmError, Result};

/// Nodal displacement `(u1, u2)` on a [`Mesh2D`], with top displacement `l`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisplacementField {
    pub mesh_n: usize,
    pub l: f64,
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
}

impl DisplacementField {
    pub fn zeros(mesh: Mesh2D, l: f64) -> Self {
        let n = mesh.num_nodes();
        Self {
            mesh_n: mesh.n(),
            l,
            u1: vec![0.0; n],
            u2: vec![0.0; n],
        }
    }

    /// Nodal interpolant of `f`.
    pub fn from_fn(mesh: Mesh2D, l: f64, f: impl Fn([f64; 2]) -> [f64; 2]) -> Self {
        let (u1, u2) = (0..mesh.num_nodes())
            .map(|p| {
                let v = f(mesh.node_coords(p));
                (v[0], v[1])
            })
            .unzip();
        Self {
            mesh_n: mesh.n(),
            l,
            u1,
            u2,
        }
    }

    pub fn mesh(&self) -> Mesh2D {
        Mesh2D::new(self.mesh_n).expect("field built on a valid mesh")
    }

    /// Checks node counts against the declared mesh.
    pub fn check(&self) -> Result<()> {
        let nodes = (self.mesh_n + 1) * (self.mesh_n + 1);
        if self.mesh_n < 2 || self.u1.len() != nodes || self.u2.len() != nodes {
            return Err(EcmError::Shape(format!(
                "displacement with {}/{} values does not fit mesh n = {}",
                self.u1.len(),
                self.u2.len(),
                self.mesh_n
            )));
        }
        Ok(())
    }

    pub(crate) fn same_mesh(&self, other: &Self) -> Result<()> {
        if self.mesh_n != other.mesh_n {
            return Err(EcmError::Shape(format!(
                "mesh n = {} vs n = {}",
                self.mesh_n, other.mesh_n
            )));
        }
        Ok(())
    }

    /// Interleaved dof vector `[u1(0), u2(0), u1(1), ...]`.
    pub fn to_dofs(&self) -> Vec<f64> {
        self.u1
            .iter()
            .zip(&self.u2)
            .flat_map(|(&a, &b)| [a, b])
            .collect()
    }

    pub fn from_dofs(mesh: Mesh2D, l: f64, dofs: &[f64]) -> Self {
        let (u1, u2) = dofs.chunks_exact(2).map(|c| (c[0], c[1])).unzip();
        Self {
            mesh_n: mesh.n(),
            l,
            u1,
            u2,
        }
    }

    /// Element dof vector in local ordering.
    pub(crate) fn element_values(&self, mesh: &Mesh2D, elem: usize) -> [f64; 8] {
        let mut out = [0.0; 8];
        for (a, &p) in mesh.element_nodes(elem).iter().enumerate() {
            out[2 * a] = self.u1[p];
            out[2 * a + 1] = self.u2[p];
        }
        out
    }

    /// `self + factor * other`; boundary data add the same way.
    pub fn add_scaled(&self, factor: f64, other: &Self) -> Result<Self> {
        self.same_mesh(other)?;
        let zip = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x + factor * y).collect();
        Ok(Self {
            mesh_n: self.mesh_n,
            l: self.l + factor * other.l,
            u1: zip(&self.u1, &other.u1),
            u2: zip(&self.u2, &other.u2),
        })
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            mesh_n: self.mesh_n,
            l: factor * self.l,
            u1: self.u1.iter().map(|v| factor * v).collect(),
            u2: self.u2.iter().map(|v| factor * v).collect(),
        }
    }

    /// Largest deviation from the Dirichlet data `u2 = 0` at the bottom and
    /// `u2 = l` at the top.
    pub fn boundary_defect(&self) -> f64 {
        let mesh = self.mesh();
        (0..mesh.num_nodes())
            .filter_map(|p| {
                if mesh.is_bottom(p) {
                    Some(self.u2[p].abs())
                } else if mesh.is_top(p) {
                    Some((self.u2[p] - self.l).abs())
                } else {
                    None
                }
            })
            .fold(0.0, f64::max)
    }
}

/// Linear functional on the right-hand side of the tensile test.
///
/// `Source` represents `v ↦ −∫ λ_src tr(ε(u_src)) tr(ε(v)) + 2 μ_src ε(u_src):ε(v)`
/// with elementwise constant `λ_src`, `μ_src`. Both pieces annihilate
/// constant shifts of `v` in the first component.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum RhsFunctional {
    #[default]
    Zero,
    Source {
        lambda_src: Vec<f64>,
        mu_src: Vec<f64>,
        u_src: DisplacementField,
    },
}

impl RhsFunctional {
    pub fn source(
        lambda_src: Vec<f64>,
        mu_src: Vec<f64>,
        u_src: DisplacementField,
    ) -> Result<Self> {
        u_src.check()?;
        let ne = u_src.mesh_n * u_src.mesh_n;
        if lambda_src.len() != ne || mu_src.len() != ne {
            return Err(EcmError::Shape(format!(
                "source coefficients of length {}/{} for {ne} elements",
                lambda_src.len(),
                mu_src.len()
            )));
        }
        Ok(RhsFunctional::Source {
            lambda_src,
            mu_src,
            u_src,
        })
    }

    /// Assembled load vector over all dofs.
    pub fn load_vector(&self, mesh: &Mesh2D) -> Result<Vec<f64>> {
        let mut b = vec![0.0; mesh.num_dofs()];
        if let RhsFunctional::Source {
            lambda_src,
            mu_src,
            u_src,
        } = self
        {
            if u_src.mesh_n != mesh.n() {
                return Err(EcmError::Shape(format!(
                    "source on mesh n = {} used with mesh n = {}",
                    u_src.mesh_n,
                    mesh.n()
                )));
            }
            let r = reference_matrices();
            for e in 0..mesh.num_elements() {
                let (ls, ms) = (lambda_src[e], mu_src[e]);
                if ls == 0.0 && ms == 0.0 {
                    continue;
                }
                let ue = u_src.element_values(mesh, e);
                let dofs = mesh.element_dofs(e);
                for p in 0..8 {
                    let mut s = 0.0;
                    for q in 0..8 {
                        s += (ls * r.k_lambda[p][q] + ms * r.k_mu[p][q]) * ue[q];
                    }
                    b[dofs[p]] -= s;
                }
            }
        }
        Ok(b)
    }

    /// Evaluates the functional on a test field.
    pub fn apply(&self, v: &DisplacementField) -> Result<f64> {
        let b = self.load_vector(&v.mesh())?;
        Ok(b.iter().zip(v.to_dofs()).map(|(x, y)| x * y).sum())
    }
}
