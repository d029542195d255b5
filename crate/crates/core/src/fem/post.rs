//! Quadrature-based post-processing: tensile force, H1 norms and means.

use super::element::{gauss_points, shape, shape_grad, GAUSS_1D};
use super::field::DisplacementField;
use super::mesh::Mesh2D;
use crate::error::{EcmError, Result};
use crate::material::MaterialField2D;

/// Values and physical gradients of both components at a reference point.
struct PointEval {
    u: [f64; 2],
    /// `grad[c] = [d_1 u_c, d_2 u_c]`
    grad: [[f64; 2]; 2],
}

fn eval(ue: &[f64; 8], xi: f64, eta: f64, h: f64) -> PointEval {
    let n = shape(xi, eta);
    let g = shape_grad(xi, eta);
    let mut u = [0.0; 2];
    let mut grad = [[0.0; 2]; 2];
    for a in 0..4 {
        for c in 0..2 {
            let v = ue[2 * a + c];
            u[c] += n[a] * v;
            grad[c][0] += g[a][0] * v / h;
            grad[c][1] += g[a][1] * v / h;
        }
    }
    PointEval { u, grad }
}

fn check(field: &MaterialField2D, u: &DisplacementField) -> Result<Mesh2D> {
    u.check()?;
    if field.mesh_n() != u.mesh_n {
        return Err(EcmError::Shape(format!(
            "material on mesh n = {} with displacement on n = {}",
            field.mesh_n(),
            u.mesh_n
        )));
    }
    Ok(u.mesh())
}

/// `∫ P22 dx` with `P22 = λ (d1 u1 + d2 u2) + 2 μ d2 u2`.
pub fn tensile_force_2d(field: &MaterialField2D, u: &DisplacementField) -> Result<f64> {
    let mesh = check(field, u)?;
    let h = mesh.h();
    let mu = field.mu();
    let gp = gauss_points();
    let total = field
        .lambda()
        .iter()
        .enumerate()
        .map(|(e, &lam)| {
            let ue = u.element_values(&mesh, e);
            gp.iter()
                .map(|&(xi, eta, w)| {
                    let p = eval(&ue, xi, eta, h);
                    let tr = p.grad[0][0] + p.grad[1][1];
                    w * (lam * tr + 2.0 * mu * p.grad[1][1])
                })
                .sum::<f64>()
        })
        .sum::<f64>();
    Ok(total * h * h)
}

/// `∫ P22(x1, 1) dx1` along the top edge, using element gradients from the
/// top row.
pub fn top_boundary_force(field: &MaterialField2D, u: &DisplacementField) -> Result<f64> {
    let mesh = check(field, u)?;
    let (n, h, mu) = (mesh.n(), mesh.h(), field.mu());
    let total: f64 = (0..n)
        .map(|i| {
            let e = (n - 1) * n + i;
            let lam = field.lambda()[e];
            let ue = u.element_values(&mesh, e);
            GAUSS_1D
                .iter()
                .map(|&(xi, w)| {
                    let p = eval(&ue, xi, 1.0, h);
                    w * (lam * (p.grad[0][0] + p.grad[1][1]) + 2.0 * mu * p.grad[1][1])
                })
                .sum::<f64>()
        })
        .sum();
    Ok(total * h)
}

/// Squared H1 contributions `(L2 part, gradient part)` of a field.
fn h1_parts(u: &DisplacementField) -> (f64, f64) {
    let mesh = u.mesh();
    let h = mesh.h();
    let gp = gauss_points();
    let (mut l2, mut semi) = (0.0, 0.0);
    for e in 0..mesh.num_elements() {
        let ue = u.element_values(&mesh, e);
        for &(xi, eta, w) in &gp {
            let p = eval(&ue, xi, eta, h);
            l2 += w * (p.u[0] * p.u[0] + p.u[1] * p.u[1]);
            semi += w * p.grad.iter().flatten().map(|g| g * g).sum::<f64>();
        }
    }
    (l2 * h * h, semi * h * h)
}

pub fn h1_norm(u: &DisplacementField) -> Result<f64> {
    u.check()?;
    let (a, b) = h1_parts(u);
    Ok((a + b).sqrt())
}

pub fn h1_seminorm(u: &DisplacementField) -> Result<f64> {
    u.check()?;
    Ok(h1_parts(u).1.sqrt())
}

/// `||u - v||_{H1}`.
pub fn h1_diff(u: &DisplacementField, v: &DisplacementField) -> Result<f64> {
    u.check()?;
    v.check()?;
    h1_norm(&u.add_scaled(-1.0, v)?)
}

/// `|u - v|_{H1}`, blind to constant offsets.
pub fn h1_seminorm_diff(u: &DisplacementField, v: &DisplacementField) -> Result<f64> {
    u.check()?;
    v.check()?;
    h1_seminorm(&u.add_scaled(-1.0, v)?)
}

/// `sqrt(a(u, u))` for the bilinear form of `field`.
pub fn energy_norm(field: &MaterialField2D, u: &DisplacementField) -> Result<f64> {
    let mesh = check(field, u)?;
    let r = super::element::reference_matrices();
    let mu = field.mu();
    let total: f64 = field
        .lambda()
        .iter()
        .enumerate()
        .map(|(e, &lam)| {
            let ue = u.element_values(&mesh, e);
            let mut s = 0.0;
            for p in 0..8 {
                for q in 0..8 {
                    s += ue[p] * (lam * r.k_lambda[p][q] + mu * r.k_mu[p][q]) * ue[q];
                }
            }
            s
        })
        .sum();
    Ok(total.max(0.0).sqrt())
}

/// `∫ d2 u2 dx`.
pub fn mean_partial2_u2(u: &DisplacementField) -> Result<f64> {
    u.check()?;
    let mesh = u.mesh();
    let h = mesh.h();
    // per element the integral is h/2 times the difference of the top and
    // bottom edge sums
    let total: f64 = (0..mesh.num_elements())
        .map(|e| {
            let [a, b, c, d] = mesh.element_nodes(e);
            0.5 * h * ((u.u2[c] + u.u2[d]) - (u.u2[a] + u.u2[b]))
        })
        .sum();
    Ok(total)
}

/// `∫ d1 u1 dx`.
pub fn mean_partial1_u1(u: &DisplacementField) -> Result<f64> {
    u.check()?;
    let mesh = u.mesh();
    let h = mesh.h();
    let total: f64 = (0..mesh.num_elements())
        .map(|e| {
            let [a, b, c, d] = mesh.element_nodes(e);
            0.5 * h * ((u.u1[b] + u.u1[c]) - (u.u1[a] + u.u1[d]))
        })
        .sum();
    Ok(total)
}

/// `∫ u1 dx`.
pub fn mean_u1(u: &DisplacementField) -> f64 {
    u.mesh()
        .node_weights()
        .iter()
        .zip(&u.u1)
        .map(|(w, v)| w * v)
        .sum()
}
