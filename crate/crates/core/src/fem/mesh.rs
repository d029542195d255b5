use serde::{Deserialize, Serialize};

use crate::error::{EcmError, Result};

/// Uniform quadrilateral grid on the unit square with `n` elements per side.
///
/// Nodes are numbered row-major, `node = j * (n + 1) + i` with `x = (i h, j h)`;
/// elements likewise, `elem = j * n + i`. Each node carries the two
/// displacement components at dof `2 * node + c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mesh2D {
    n: usize,
}

impl Mesh2D {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(EcmError::Resolution(format!(
                "a mesh needs at least 2 elements per side, got {n}"
            )));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn num_nodes(&self) -> usize {
        (self.n + 1) * (self.n + 1)
    }

    pub fn num_elements(&self) -> usize {
        self.n * self.n
    }

    pub fn num_dofs(&self) -> usize {
        2 * self.num_nodes()
    }

    #[inline]
    pub fn node_index(&self, i: usize, j: usize) -> usize {
        j * (self.n + 1) + i
    }

    #[inline]
    pub fn node_ij(&self, node: usize) -> (usize, usize) {
        (node % (self.n + 1), node / (self.n + 1))
    }

    pub fn node_coords(&self, node: usize) -> [f64; 2] {
        let (i, j) = self.node_ij(node);
        [i as f64 * self.h(), j as f64 * self.h()]
    }

    #[inline]
    pub fn element_ij(&self, elem: usize) -> (usize, usize) {
        (elem % self.n, elem / self.n)
    }

    /// Counter-clockwise corner nodes starting at the lower-left corner.
    #[inline]
    pub fn element_nodes(&self, elem: usize) -> [usize; 4] {
        let (i, j) = self.element_ij(elem);
        [
            self.node_index(i, j),
            self.node_index(i + 1, j),
            self.node_index(i + 1, j + 1),
            self.node_index(i, j + 1),
        ]
    }

    pub fn element_dofs(&self, elem: usize) -> [usize; 8] {
        let nodes = self.element_nodes(elem);
        let mut dofs = [0; 8];
        for (a, &p) in nodes.iter().enumerate() {
            dofs[2 * a] = 2 * p;
            dofs[2 * a + 1] = 2 * p + 1;
        }
        dofs
    }

    pub fn element_centroid(&self, elem: usize) -> [f64; 2] {
        let (i, j) = self.element_ij(elem);
        let h = self.h();
        [(i as f64 + 0.5) * h, (j as f64 + 0.5) * h]
    }

    /// `[x0, x1, y0, y1]` of an element.
    pub fn element_bounds(&self, elem: usize) -> [f64; 4] {
        let (i, j) = self.element_ij(elem);
        let h = self.h();
        [
            i as f64 * h,
            (i + 1) as f64 * h,
            j as f64 * h,
            (j + 1) as f64 * h,
        ]
    }

    /// Diameter of every element (`sqrt(2) h`).
    pub fn element_diameter(&self) -> f64 {
        std::f64::consts::SQRT_2 * self.h()
    }

    /// `∫ N_p dx` for every node; these weights sum to one.
    pub fn node_weights(&self) -> Vec<f64> {
        let n = self.n;
        let quarter = 0.25 * self.h() * self.h();
        (0..self.num_nodes())
            .map(|p| {
                let (i, j) = self.node_ij(p);
                let cx = if i == 0 || i == n { 1.0 } else { 2.0 };
                let cy = if j == 0 || j == n { 1.0 } else { 2.0 };
                cx * cy * quarter
            })
            .collect()
    }

    pub fn is_bottom(&self, node: usize) -> bool {
        self.node_ij(node).1 == 0
    }

    pub fn is_top(&self, node: usize) -> bool {
        self.node_ij(node).1 == self.n
    }
}
