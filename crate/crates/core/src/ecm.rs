//! Self-consistent embedded cell iterations in 1D and 2D.
//!
//! A single metal/ceramic cell sits inside a dummy material. Each step runs a
//! tensile test on the assembly and replaces the dummy parameter by the
//! equivalent parameter of the whole body, until the parameter stops moving.

use serde::{Deserialize, Serialize};

use crate::elastic1d::{kappa_equiv, solve_tensile_1d, tensile_force_1d};
use crate::error::{EcmError, Result};
use crate::fem::{DisplacementField, Mesh2D, RhsFunctional, SolveOptions, TensileSystem};
use crate::geometry::{solve_ecm_radii, EmbeddedCellGeometry2D};
use crate::material::{
    build_ecm_kappa_1d, build_ecm_lambda_unchecked, PhaseAssignment, PhaseParams,
};

/// Default relative stop tolerance of the 1D iteration.
pub const DEFAULT_TOL_1D: f64 = 1e-10;
/// Default relative stop tolerance of the 2D iteration.
pub const DEFAULT_TOL_2D: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Tolerance,
    MaxIter,
}

/// Iterates of the dummy parameter and the forces they produced.
///
/// `forces[n]` is computed from `dummy_values[n]` and yields
/// `dummy_values[n + 1]`, so there is always one more dummy value than force.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EcmTrace {
    pub dummy_values: Vec<f64>,
    pub forces: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub stop_reason: StopReason,
}

impl EcmTrace {
    /// Last dummy parameter.
    pub fn limit(&self) -> f64 {
        *self
            .dummy_values
            .last()
            .expect("trace starts with an initial guess")
    }

    /// Force of the last completed step.
    pub fn last_force(&self) -> Option<f64> {
        self.forces.last().copied()
    }

    /// `|d[n+1] - d[n]| / |d[n]|` for every step.
    pub fn relative_changes(&self) -> Vec<f64> {
        self.dummy_values
            .windows(2)
            .map(|w| relative_change(w[0], w[1]))
            .collect()
    }

    fn run(
        initial: f64,
        tol: f64,
        max_iter: usize,
        mut step: impl FnMut(f64) -> Result<(f64, f64)>,
    ) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(EcmError::invalid("tol", "must be positive"));
        }
        let mut dummy_values = vec![initial];
        let mut forces = Vec::new();
        let mut converged = false;
        while forces.len() < max_iter {
            let current = *dummy_values.last().unwrap();
            let (force, next) = step(current)?;
            forces.push(force);
            dummy_values.push(next);
            if relative_change(current, next) <= tol {
                converged = true;
                break;
            }
        }
        Ok(Self {
            iterations: forces.len(),
            stop_reason: if converged {
                StopReason::Tolerance
            } else {
                StopReason::MaxIter
            },
            dummy_values,
            forces,
            converged,
        })
    }
}

fn relative_change(old: f64, new: f64) -> f64 {
    if old == new {
        0.0
    } else {
        (new - old).abs() / old.abs()
    }
}

/// Constant `λ` of the homogeneous body that needs force `F` for
/// displacement `l` at shear modulus `μ`.
pub fn lambda_equiv(force: f64, mu: f64, l: f64) -> Result<f64> {
    if l == 0.0 {
        return Err(EcmError::DivisionByZero(
            "lambda_equiv needs a non-zero displacement",
        ));
    }
    if !(mu > 0.0) {
        return Err(EcmError::invalid("mu", "must be positive"));
    }
    let denominator = 2.0 * l - force / (2.0 * mu);
    if denominator.abs() <= 1e-12 * (2.0 * l).abs() {
        return Err(EcmError::SingularExtraction { denominator });
    }
    Ok((force - 2.0 * mu * l) / denominator)
}

/// Force of the homogeneous body with parameters `(λ, μ)`.
pub fn homogeneous_force(lambda: f64, mu: f64, l: f64) -> f64 {
    let nu = lambda / (lambda + 2.0 * mu);
    ((1.0 - nu) * lambda + 2.0 * mu) * l
}

/// 1D iteration; each step solves the three-phase rod exactly.
pub fn run_ecm_1d(params: &PhaseParams, l: f64, tol: f64, max_iter: usize) -> Result<EcmTrace> {
    params.validate()?;
    if l == 0.0 {
        return Err(EcmError::DivisionByZero(
            "the embedded cell iteration needs l != 0",
        ));
    }
    EcmTrace::run(params.kappa_average(), tol, max_iter, |kappa| {
        let field = build_ecm_kappa_1d(params, kappa)?;
        let force = tensile_force_1d(&solve_tensile_1d(&field, l));
        Ok((force, kappa_equiv(force, l)?))
    })
}

/// Closed form of one 1D step.
pub fn ecm_1d_map(params: &PhaseParams, kappa: f64) -> f64 {
    1.0 / (params.vol_cer / (5.0 * params.kappa_cer)
        + params.vol_met() / (5.0 * params.kappa_met)
        + 4.0 / (5.0 * kappa))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ecm2dOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub assignment: PhaseAssignment,
    pub solve: SolveOptions,
    /// Seed each linear solve with the previous displacement.
    pub warm_start: bool,
}

impl Default for Ecm2dOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL_2D,
            max_iter: DEFAULT_MAX_ITER,
            assignment: PhaseAssignment::AreaFraction,
            solve: SolveOptions::default(),
            warm_start: true,
        }
    }
}

/// 2D iteration with default options apart from `tol` and `max_iter`.
pub fn run_ecm_2d(
    params: &PhaseParams,
    mesh_n: usize,
    l: f64,
    tol: f64,
    max_iter: usize,
) -> Result<EcmTrace> {
    let opts = Ecm2dOptions {
        tol,
        max_iter,
        ..Default::default()
    };
    run_ecm_2d_with(params, mesh_n, l, &opts)
}

pub fn run_ecm_2d_with(
    params: &PhaseParams,
    mesh_n: usize,
    l: f64,
    opts: &Ecm2dOptions,
) -> Result<EcmTrace> {
    params.validate()?;
    if l == 0.0 {
        return Err(EcmError::DivisionByZero(
            "the embedded cell iteration needs l != 0",
        ));
    }
    let mesh = Mesh2D::new(mesh_n)?;
    let geometry = ecm_geometry(mesh, params.vol_cer)?;
    let mut previous: Option<DisplacementField> = None;
    EcmTrace::run(params.lambda_average(), opts.tol, opts.max_iter, |lambda| {
        let field = build_ecm_lambda_unchecked(mesh, params, &geometry, lambda, opts.assignment)?;
        let system = TensileSystem::new(&field)?;
        let warm = previous.as_ref().filter(|_| opts.warm_start);
        let result = system.run(l, &RhsFunctional::Zero, &opts.solve, warm)?;
        let next = lambda_equiv(result.force, params.mu, l)?;
        previous = Some(result.displacement);
        Ok((result.force, next))
    })
}

/// Embedded-cell radii for `vol_cer`, including the single-phase ends.
fn ecm_geometry(mesh: Mesh2D, vol_cer: f64) -> Result<EmbeddedCellGeometry2D> {
    if vol_cer == 0.0 || vol_cer == 1.0 {
        return Ok(EmbeddedCellGeometry2D::single_phase(vol_cer));
    }
    let g = solve_ecm_radii(vol_cer)?;
    if mesh.element_diameter() > g.r1 {
        return Err(EcmError::Resolution(format!(
            "element diameter {:.4} exceeds the ceramic radius {:.4}",
            mesh.element_diameter(),
            g.r1
        )));
    }
    Ok(g)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "index")]
pub enum Monotonicity {
    Increasing,
    Decreasing,
    Constant,
    /// Index of the first value moving against the established direction.
    Violated(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonotoneReport {
    pub monotonicity: Monotonicity,
    /// Every value lies in `[lo - slack, hi + slack]`.
    pub contained: bool,
    /// Largest distance outside `[lo, hi]`.
    pub max_excursion: f64,
}

impl MonotoneReport {
    pub fn is_monotone(&self) -> bool {
        !matches!(self.monotonicity, Monotonicity::Violated(_))
    }
}

/// Classifies a sequence; ties never break monotonicity.
pub fn classify_monotone(values: &[f64]) -> Monotonicity {
    let mut direction = 0.0f64;
    for (i, w) in values.windows(2).enumerate() {
        let d = w[1] - w[0];
        if d == 0.0 {
            continue;
        }
        if direction == 0.0 {
            direction = d.signum();
        } else if d.signum() != direction {
            return Monotonicity::Violated(i + 1);
        }
    }
    match direction {
        d if d > 0.0 => Monotonicity::Increasing,
        d if d < 0.0 => Monotonicity::Decreasing,
        _ => Monotonicity::Constant,
    }
}

/// Monotonicity of the dummy values plus containment in the interval spanned
/// by the two phase values, widened by `slack`.
pub fn check_monotone(trace: &EcmTrace, phase_a: f64, phase_b: f64, slack: f64) -> MonotoneReport {
    let (lo, hi) = (phase_a.min(phase_b), phase_a.max(phase_b));
    let max_excursion = trace
        .dummy_values
        .iter()
        .map(|&v| (lo - v).max(v - hi).max(0.0))
        .fold(0.0, f64::max);
    MonotoneReport {
        monotonicity: classify_monotone(&trace.dummy_values),
        contained: max_excursion <= slack,
        max_excursion,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn lambda_equiv_examples() {
        let f = homogeneous_force(2.0, 1.0, 0.01);
        assert_relative_eq!(f, 0.03, max_relative = 1e-14);
        assert_relative_eq!(
            lambda_equiv(f, 1.0, 0.01).unwrap(),
            2.0,
            max_relative = 1e-12
        );
        assert_eq!(lambda_equiv(2.0 * 0.7 * 0.1, 0.7, 0.1).unwrap(), 0.0);
        assert!(matches!(
            lambda_equiv(1.0, 1.0, 0.0),
            Err(EcmError::DivisionByZero(_))
        ));
        assert!(matches!(
            lambda_equiv(4.0, 1.0, 1.0),
            Err(EcmError::SingularExtraction { .. })
        ));
    }

    #[test]
    fn ecm_1d_worked_example() {
        let p = PhaseParams::longitudinal(2.0, 6.0, 0.5).unwrap();
        let t = run_ecm_1d(&p, 0.01, 1e-12, 500).unwrap();
        assert_eq!(t.dummy_values[0], 4.0);
        assert_relative_eq!(t.dummy_values[1], 3.75, max_relative = 1e-13);
        assert!(t.converged);
        assert_relative_eq!(t.limit(), 3.0, max_relative = 1e-10);
        assert_relative_eq!(t.last_force().unwrap(), 0.03, max_relative = 1e-10);
        assert_eq!(t.forces.len() + 1, t.dummy_values.len());
        assert_eq!(classify_monotone(&t.dummy_values), Monotonicity::Decreasing);
    }

    #[test]
    fn ecm_1d_equal_phases_one_step() {
        let p = PhaseParams::longitudinal(3.0, 3.0, 0.4).unwrap();
        let t = run_ecm_1d(&p, 1.0, 1e-10, 10).unwrap();
        assert_eq!(t.iterations, 1);
        assert!(t.converged);
        assert_relative_eq!(t.limit(), 3.0, max_relative = 1e-15);
    }

    #[test]
    fn ecm_1d_max_iter_flagged() {
        let p = PhaseParams::longitudinal(2.0, 6.0, 0.5).unwrap();
        let t = run_ecm_1d(&p, 1.0, 1e-12, 3).unwrap();
        assert!(!t.converged);
        assert_eq!(t.stop_reason, StopReason::MaxIter);
        assert_eq!(t.iterations, 3);
    }

    #[test]
    fn monotone_classification() {
        assert_eq!(classify_monotone(&[1.0, 1.0, 1.0]), Monotonicity::Constant);
        assert_eq!(
            classify_monotone(&[1.0, 1.2, 1.1]),
            Monotonicity::Violated(2)
        );
        assert_eq!(
            classify_monotone(&[1.0, 1.2, 1.2, 1.3]),
            Monotonicity::Increasing
        );
        assert_eq!(
            classify_monotone(&[4.0, 3.75, 3.5]),
            Monotonicity::Decreasing
        );
    }

    #[test]
    fn containment_slack() {
        let trace = EcmTrace {
            dummy_values: vec![1.05, 1.1001],
            forces: vec![0.0],
            converged: true,
            iterations: 1,
            stop_reason: StopReason::Tolerance,
        };
        assert!(!check_monotone(&trace, 1.0, 1.1, 0.0).contained);
        assert!(check_monotone(&trace, 1.0, 1.1, 2e-4).contained);
    }

    #[test]
    fn ecm_2d_homogeneous_cell() {
        let p = PhaseParams::perturbed(1.0, 1.0, 0.0, 1.0, 0.5).unwrap();
        let t = run_ecm_2d(&p, 32, 0.01, 1e-8, 10).unwrap();
        assert_eq!(t.dummy_values[0], 1.0);
        assert!(t.converged);
        assert!(t.iterations <= 2);
        assert!((t.limit() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn ecm_2d_single_phase_ends() {
        for (vol, expected) in [(0.0, 1.0), (1.0, 1.2)] {
            let p = PhaseParams::perturbed(1.0, 1.0, 0.2, 1.0, vol).unwrap();
            let t = run_ecm_2d(&p, 16, 0.01, 1e-8, 10).unwrap();
            for v in &t.dummy_values {
                assert!((v - expected).abs() < 1e-9);
            }
        }
    }
}
