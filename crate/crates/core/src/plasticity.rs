//! 1D elasto-plastic extension for a 1/1 metal-ceramic mixture.
//!
//! The ceramic stays linear with modulus `κ_cer`. The metal follows
//! `F = α s` up to the critical strain and `F = α s_c + β (s - s_c)^{1/2}`
//! beyond it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ecm::{EcmTrace, StopReason};
use crate::error::{EcmError, Result};

/// Nonlinear force-strain law of the metal phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlasticMetalLaw {
    pub alpha: f64,
    pub beta: f64,
    pub u_crit: f64,
}

impl PlasticMetalLaw {
    pub fn new(alpha: f64, beta: f64, u_crit: f64) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("beta", beta), ("u_crit", u_crit)] {
            if !(v > 0.0) {
                return Err(EcmError::invalid(
                    name,
                    format!("must be positive, got {v}"),
                ));
            }
        }
        Ok(Self {
            alpha,
            beta,
            u_crit,
        })
    }

    /// Force at the critical strain.
    pub fn yield_force(&self) -> f64 {
        self.alpha * self.u_crit
    }

    /// Metal strain carrying force `f >= 0`; the exact inverse of
    /// [`metal_force`], so the hardening term enters as `((f - α s_c) / β)^2`.
    pub fn strain(&self, f: f64) -> f64 {
        if f <= self.yield_force() {
            f / self.alpha
        } else {
            self.u_crit + ((f - self.yield_force()) / self.beta).powi(2)
        }
    }
}

pub fn metal_force(strain: f64, law: &PlasticMetalLaw) -> Result<f64> {
    if !(strain >= 0.0) {
        return Err(EcmError::Domain(format!(
            "metal strain must be non-negative, got {strain}"
        )));
    }
    Ok(if strain <= law.u_crit {
        law.alpha * strain
    } else {
        law.yield_force() + law.beta * (strain - law.u_crit).sqrt()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Elastic,
    Plastic,
}

/// Displacement at which the metal reaches the critical strain.
pub fn yield_displacement(kappa_cer: f64, law: &PlasticMetalLaw) -> f64 {
    0.5 * (law.yield_force() / kappa_cer + law.u_crit)
}

/// Total elongation of the half-ceramic, half-metal rod under force `f`.
pub fn mixture_elongation(f: f64, kappa_cer: f64, law: &PlasticMetalLaw) -> f64 {
    0.5 * (f / kappa_cer + law.strain(f))
}

fn check_inputs(l: f64, kappa_cer: f64) -> Result<()> {
    if !(l >= 0.0 && l.is_finite()) {
        return Err(EcmError::Domain(format!(
            "displacement must be non-negative, got {l}"
        )));
    }
    if !(kappa_cer > 0.0) {
        return Err(EcmError::invalid("kappa_cer", "must be positive"));
    }
    Ok(())
}

/// Force of the 1/1 rod stretched by `l`.
pub fn solve_stress_strain(l: f64, kappa_cer: f64, law: &PlasticMetalLaw) -> Result<f64> {
    check_inputs(l, kappa_cer)?;
    let elastic = l / (0.5 / kappa_cer + 0.5 / law.alpha);
    if elastic / law.alpha <= law.u_crit {
        return Ok(elastic);
    }
    solve_increasing(law.yield_force(), l, |f| {
        mixture_elongation(f, kappa_cer, law)
    })
}

/// Smallest `f >= lo` with `g(f) = target` for increasing `g`, by bisection
/// down to adjacent floating-point values.
fn solve_increasing(lo: f64, target: f64, g: impl Fn(f64) -> f64) -> Result<f64> {
    let mut lo = lo;
    if g(lo) >= target {
        return Ok(lo);
    }
    let mut hi = 2.0 * lo.max(f64::MIN_POSITIVE);
    let mut grown = 0;
    while g(hi) < target {
        lo = hi;
        hi *= 2.0;
        grown += 1;
        if grown > 2000 || !hi.is_finite() {
            return Err(EcmError::ModelRange(format!(
                "no force reaches the elongation {target}"
            )));
        }
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // pick the endpoint with the smaller defect
    Ok(if (g(lo) - target).abs() <= (g(hi) - target).abs() {
        lo
    } else {
        hi
    })
}

/// Embedded-cell iteration with the plastic metal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlasticEcmResult {
    pub trace: EcmTrace,
    /// Force of the last step.
    pub force: f64,
}

/// Force of the three-phase rod: ceramic and metal of length 1/10 each,
/// dummy of modulus `kappa_dummy` on the remaining 4/5.
pub fn cell_force(l: f64, kappa_cer: f64, law: &PlasticMetalLaw, kappa_dummy: f64) -> Result<f64> {
    check_inputs(l, kappa_cer)?;
    let elongation = |f: f64| 0.1 * (f / kappa_cer + law.strain(f)) + 0.8 * f / kappa_dummy;
    let elastic = l / (0.1 / kappa_cer + 0.1 / law.alpha + 0.8 / kappa_dummy);
    if elastic / law.alpha <= law.u_crit {
        return Ok(elastic);
    }
    solve_increasing(law.yield_force(), l, elongation)
}

pub fn run_ecm_plastic(
    kappa_cer: f64,
    law: &PlasticMetalLaw,
    l: f64,
    tol: f64,
    max_iter: usize,
) -> Result<PlasticEcmResult> {
    check_inputs(l, kappa_cer)?;
    if l == 0.0 {
        return Err(EcmError::DivisionByZero(
            "the embedded cell iteration needs l != 0",
        ));
    }
    if !(tol > 0.0) {
        return Err(EcmError::invalid("tol", "must be positive"));
    }
    let mut dummy_values = vec![0.5 * kappa_cer + 0.5 * law.alpha];
    let mut forces = Vec::new();
    let mut converged = false;
    while forces.len() < max_iter {
        let kappa = *dummy_values.last().unwrap();
        let f = cell_force(l, kappa_cer, law, kappa)?;
        let next = f / l;
        forces.push(f);
        dummy_values.push(next);
        if (next - kappa).abs() <= tol * kappa.abs() {
            converged = true;
            break;
        }
    }
    let force = *forces.last().unwrap_or(&0.0);
    Ok(PlasticEcmResult {
        trace: EcmTrace {
            iterations: forces.len(),
            stop_reason: if converged {
                StopReason::Tolerance
            } else {
                StopReason::MaxIter
            },
            dummy_values,
            forces,
            converged,
        },
        force,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub l: f64,
    #[serde(rename = "F_direct")]
    pub f_direct: f64,
    #[serde(rename = "F_ecm")]
    pub f_ecm: f64,
    pub regime: Regime,
}

/// Direct and embedded-cell forces along an ascending displacement grid.
pub fn stress_strain_curve(
    l_grid: &[f64],
    kappa_cer: f64,
    law: &PlasticMetalLaw,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<CurveRow>> {
    if l_grid.is_empty() || l_grid.iter().any(|&l| !(l > 0.0)) {
        return Err(EcmError::invalid("l_grid", "needs positive displacements"));
    }
    if l_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(EcmError::invalid("l_grid", "must be strictly ascending"));
    }
    let l_star = yield_displacement(kappa_cer, law);
    l_grid
        .par_iter()
        .map(|&l| {
            let f_direct = solve_stress_strain(l, kappa_cer, law)?;
            let ecm = run_ecm_plastic(kappa_cer, law, l, tol, max_iter)?;
            if !ecm.trace.converged {
                return Err(EcmError::ModelRange(format!(
                    "plastic embedded cell iteration did not converge at l = {l}"
                )));
            }
            Ok(CurveRow {
                l,
                f_direct,
                f_ecm: ecm.force,
                regime: if l <= l_star {
                    Regime::Elastic
                } else {
                    Regime::Plastic
                },
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_law() -> PlasticMetalLaw {
        PlasticMetalLaw::new(1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn metal_law_values() {
        let law = unit_law();
        assert_eq!(metal_force(0.0, &law).unwrap(), 0.0);
        assert_eq!(metal_force(1.0, &law).unwrap(), 1.0);
        assert_eq!(metal_force(2.0, &law).unwrap(), 2.0);
        assert!(matches!(metal_force(-0.1, &law), Err(EcmError::Domain(_))));
        assert!(PlasticMetalLaw::new(1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn strain_inverts_force() {
        let law = PlasticMetalLaw::new(2.0, 0.5, 0.3).unwrap();
        for s in [0.0, 0.1, 0.3, 0.5, 2.0] {
            let f = metal_force(s, &law).unwrap();
            assert_relative_eq!(law.strain(f), s, epsilon = 1e-14, max_relative = 1e-13);
        }
    }

    #[test]
    fn worked_relation_example() {
        let law = unit_law();
        assert_relative_eq!(
            mixture_elongation(1.0, 2.0, &law),
            0.75,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            solve_stress_strain(0.75, 2.0, &law).unwrap(),
            1.0,
            max_relative = 1e-12
        );
        let f = solve_stress_strain(1.4, 2.0, &law).unwrap();
        assert!((mixture_elongation(f, 2.0, &law) - 1.4).abs() < 1e-12);
    }

    #[test]
    fn elastic_branch_closed_form() {
        let law = unit_law();
        let l = 0.3;
        let f = solve_stress_strain(l, 2.0, &law).unwrap();
        assert_relative_eq!(f, l / (0.25 + 0.5), max_relative = 1e-15);
    }

    #[test]
    fn ecm_elastic_limit_is_harmonic_mean() {
        let law = unit_law();
        let r = run_ecm_plastic(2.0, &law, 0.2, 1e-13, 500).unwrap();
        assert!(r.trace.converged);
        assert_relative_eq!(r.trace.limit(), 1.0 / (0.25 + 0.5), max_relative = 1e-11);
    }

    #[test]
    fn ecm_matches_direct_in_plastic_regime() {
        let law = PlasticMetalLaw::new(3.0, 0.8, 0.2).unwrap();
        for l in [0.5, 1.0, 3.0] {
            let r = run_ecm_plastic(5.0, &law, l, 1e-13, 500).unwrap();
            let direct = solve_stress_strain(l, 5.0, &law).unwrap();
            assert!((r.force - direct).abs() < 1e-9, "l = {l}");
        }
    }

    #[test]
    fn huge_critical_strain_is_linear() {
        let law = PlasticMetalLaw::new(1.5, 1.0, 1e12).unwrap();
        let r = run_ecm_plastic(4.0, &law, 2.0, 1e-13, 500).unwrap();
        let kappa_hom = 1.0 / (0.5 / 4.0 + 0.5 / 1.5);
        assert_relative_eq!(r.trace.limit(), kappa_hom, max_relative = 1e-11);
    }

    #[test]
    fn curve_rejects_bad_grid() {
        let law = unit_law();
        assert!(stress_strain_curve(&[0.2, 0.1], 2.0, &law, 1e-12, 100).is_err());
        assert!(stress_strain_curve(&[], 2.0, &law, 1e-12, 100).is_err());
    }
}
