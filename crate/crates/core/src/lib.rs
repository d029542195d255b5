//! Embedded cell method for two-phase linear elastic composites: closed-form
//! 1D solvers, a plane-stress finite-element tensile test, the self-consistent
//! dummy-material iteration, homogenization references, a 1D elasto-plastic
//! variant and the small-contrast perturbation series.

pub mod ecm;
pub mod elastic1d;
pub mod error;
pub mod fem;
pub mod geometry;
pub mod homogenization;
pub mod io;
pub mod material;
pub mod perturbation;
pub mod plasticity;

pub use error::{EcmError, Result};
