//! Bilinear quadrilateral element on an axis-aligned square of side `h`.
//!
//! On a square the element stiffness is independent of `h`, so the two
//! reference matrices below are computed once and scaled by the element's
//! Lamé parameters: `K_e = lambda * K_LAMBDA + mu * K_MU`.

use std::sync::OnceLock;

/// 2-point Gauss rule mapped to `[0, 1]`.
pub const GAUSS_1D: [(f64, f64); 2] = [
    (0.5 - 0.288_675_134_594_812_9, 0.5),
    (0.5 + 0.288_675_134_594_812_9, 0.5),
];

/// Tensor 2x2 Gauss points `(xi, eta, weight)` on the unit reference square.
pub fn gauss_points() -> [(f64, f64, f64); 4] {
    let mut pts = [(0.0, 0.0, 0.0); 4];
    let mut k = 0;
    for &(eta, we) in &GAUSS_1D {
        for &(xi, wx) in &GAUSS_1D {
            pts[k] = (xi, eta, wx * we);
            k += 1;
        }
    }
    pts
}

/// Shape function values at `(xi, eta)` in counter-clockwise node order.
#[inline]
pub fn shape(xi: f64, eta: f64) -> [f64; 4] {
    [
        (1.0 - xi) * (1.0 - eta),
        xi * (1.0 - eta),
        xi * eta,
        (1.0 - xi) * eta,
    ]
}

/// Reference-square shape gradients `[dN/dxi, dN/deta]`; divide by `h` for
/// physical gradients.
#[inline]
pub fn shape_grad(xi: f64, eta: f64) -> [[f64; 2]; 4] {
    [
        [-(1.0 - eta), -(1.0 - xi)],
        [1.0 - eta, -xi],
        [eta, xi],
        [-eta, 1.0 - xi],
    ]
}

pub type ElementMatrix = [[f64; 8]; 8];

pub struct ReferenceMatrices {
    /// `∫ tr(eps(N_a)) tr(eps(N_b))`
    pub k_lambda: ElementMatrix,
    /// `∫ 2 eps(N_a) : eps(N_b)`
    pub k_mu: ElementMatrix,
}

pub fn reference_matrices() -> &'static ReferenceMatrices {
    static CELL: OnceLock<ReferenceMatrices> = OnceLock::new();
    CELL.get_or_init(|| {
        let mut k_lambda = [[0.0; 8]; 8];
        let mut k_mu = [[0.0; 8]; 8];
        for (xi, eta, w) in gauss_points() {
            let g = shape_grad(xi, eta);
            // strain rows [e11, e22, gamma12] for each dof, h = 1
            let mut b = [[0.0; 8]; 3];
            for a in 0..4 {
                b[0][2 * a] = g[a][0];
                b[1][2 * a + 1] = g[a][1];
                b[2][2 * a] = g[a][1];
                b[2][2 * a + 1] = g[a][0];
            }
            for p in 0..8 {
                for q in 0..8 {
                    let div = (b[0][p] + b[1][p]) * (b[0][q] + b[1][q]);
                    let dev = 2.0 * (b[0][p] * b[0][q] + b[1][p] * b[1][q]) + b[2][p] * b[2][q];
                    k_lambda[p][q] += w * div;
                    k_mu[p][q] += w * dev;
                }
            }
        }
        ReferenceMatrices { k_lambda, k_mu }
    })
}

/// `out += (lambda K_LAMBDA + mu K_MU) u` for an 8-vector of element dofs.
#[inline]
pub fn apply_element(lambda: f64, mu: f64, u: &[f64; 8], out: &mut [f64; 8]) {
    let r = reference_matrices();
    for p in 0..8 {
        let mut s = 0.0;
        for q in 0..8 {
            s += (lambda * r.k_lambda[p][q] + mu * r.k_mu[p][q]) * u[q];
        }
        out[p] += s;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat_vec(m: &ElementMatrix, v: &[f64; 8]) -> [f64; 8] {
        let mut out = [0.0; 8];
        for p in 0..8 {
            for q in 0..8 {
                out[p] += m[p][q] * v[q];
            }
        }
        out
    }

    #[test]
    fn symmetric() {
        let r = reference_matrices();
        for p in 0..8 {
            for q in 0..8 {
                assert!((r.k_lambda[p][q] - r.k_lambda[q][p]).abs() < 1e-15);
                assert!((r.k_mu[p][q] - r.k_mu[q][p]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn rigid_modes_in_kernel() {
        let r = reference_matrices();
        let corners = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let tx = [1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0];
        let ty = [0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0];
        let mut rot = [0.0; 8];
        for a in 0..4 {
            rot[2 * a] = -corners[a][1];
            rot[2 * a + 1] = corners[a][0];
        }
        for mode in [tx, ty, rot] {
            for m in [&r.k_lambda, &r.k_mu] {
                let y = mat_vec(m, &mode);
                assert!(y.iter().all(|v| v.abs() < 1e-14));
            }
        }
    }

    #[test]
    fn uniaxial_energy() {
        // u = (x, 0): tr = 1, eps:eps = 1 on the unit square
        let r = reference_matrices();
        let u = [0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0];
        let ku = mat_vec(&r.k_lambda, &u);
        let e: f64 = (0..8).map(|p| u[p] * ku[p]).sum();
        assert!((e - 1.0).abs() < 1e-14);
        let ku = mat_vec(&r.k_mu, &u);
        let e: f64 = (0..8).map(|p| u[p] * ku[p]).sum();
        assert!((e - 2.0).abs() < 1e-14);
    }

    #[test]
    fn shape_partition_of_unity() {
        for (xi, eta, _) in gauss_points() {
            let s: f64 = shape(xi, eta).iter().sum();
            assert!((s - 1.0).abs() < 1e-15);
            let g = shape_grad(xi, eta);
            let gx: f64 = g.iter().map(|d| d[0]).sum();
            let gy: f64 = g.iter().map(|d| d[1]).sum();
            assert!(gx.abs() < 1e-15 && gy.abs() < 1e-15);
        }
    }
}
