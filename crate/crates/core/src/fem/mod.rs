//! Bilinear finite elements for the plane-stress tensile test on the unit
//! square with greased top and bottom faces.

pub mod element;
pub mod export;
pub mod field;
pub mod mesh;
pub mod post;
pub mod solver;
pub mod sparse;

pub use field::{DisplacementField, RhsFunctional};
pub use mesh::Mesh2D;
pub use post::{
    energy_norm, h1_diff, h1_norm, h1_seminorm, h1_seminorm_diff, mean_partial1_u1,
    mean_partial2_u2, mean_u1, tensile_force_2d, top_boundary_force,
};
pub use solver::{
    solve_tensile_2d, solve_tensile_2d_with, LinearSolver, SolveOptions, TensileResult,
    TensileSystem,
};
pub use sparse::SolveStats;

/// Same as [`Mesh2D::new`].
pub fn build_mesh(n: usize) -> crate::Result<Mesh2D> {
    Mesh2D::new(n)
}
