//! Closed-form 1D tensile test for piecewise-constant longitudinal moduli,
//! together with the harmonic-mean reference and random-layer sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{EcmError, Result};
use crate::material::{MaterialField1D, PhaseParams};

/// Exact solution of `-(κ u')' = 0`, `u(0) = 0`, `u(1) = l`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution1D {
    pub field: MaterialField1D,
    pub l: f64,
    /// Constant flux `κ u'`.
    pub alpha: f64,
    /// `u` at every breakpoint.
    pub node_values: Vec<f64>,
}

impl Solution1D {
    /// Slope `α / κ_i` of `u` on each interval.
    pub fn slopes(&self) -> Vec<f64> {
        self.field.values().iter().map(|k| self.alpha / k).collect()
    }
}

/// `α = l / Σ (length_i / κ_i)` with `u` piecewise linear.
pub fn solve_tensile_1d(field: &MaterialField1D, l: f64) -> Solution1D {
    let compliance: f64 = field.intervals().map(|(len, k)| len / k).sum();
    let alpha = l / compliance;
    let mut node_values = Vec::with_capacity(field.breakpoints().len());
    let mut u = 0.0;
    node_values.push(u);
    for (len, k) in field.intervals() {
        u += alpha * len / k;
        node_values.push(u);
    }
    *node_values.last_mut().unwrap() = l;
    Solution1D {
        field: field.clone(),
        l,
        alpha,
        node_values,
    }
}

/// Force at the right end; equal to the constant flux.
pub fn tensile_force_1d(sol: &Solution1D) -> f64 {
    sol.alpha
}

/// `F / l`.
pub fn kappa_equiv(force: f64, l: f64) -> Result<f64> {
    if l == 0.0 {
        return Err(EcmError::DivisionByZero(
            "kappa_equiv needs a non-zero displacement",
        ));
    }
    Ok(force / l)
}

/// Volume-weighted harmonic mean of the two moduli.
pub fn kappa_hom(params: &PhaseParams) -> f64 {
    1.0 / (params.vol_met() / params.kappa_met + params.vol_cer / params.kappa_cer)
}

/// `n_cells` equal layers, each ceramic with probability `p_cer`.
///
/// Layer `i` is decided by the `i`-th draw of a ChaCha8 stream keyed by
/// `seed`, so a field depends only on `(seed, i)`.
pub fn sample_random_material(
    params: &PhaseParams,
    p_cer: f64,
    n_cells: usize,
    seed: u64,
) -> Result<MaterialField1D> {
    sample_stream(params, p_cer, n_cells, seed, 0)
}

fn sample_stream(
    params: &PhaseParams,
    p_cer: f64,
    n_cells: usize,
    seed: u64,
    stream: u64,
) -> Result<MaterialField1D> {
    if !(0.0..=1.0).contains(&p_cer) {
        return Err(EcmError::invalid(
            "p_cer",
            format!("must lie in [0, 1], got {p_cer}"),
        ));
    }
    if n_cells == 0 {
        return Err(EcmError::invalid("n_cells", "must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let values = (0..n_cells)
        .map(|_| {
            if rng.gen::<f64>() < p_cer {
                params.kappa_cer
            } else {
                params.kappa_met
            }
        })
        .collect();
    let n = n_cells as f64;
    let breakpoints = (0..=n_cells)
        .map(|i| if i == n_cells { 1.0 } else { i as f64 / n })
        .collect();
    MaterialField1D::new(breakpoints, values)
}

/// Monte-Carlo statistics of the force for one layer count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StochasticRow {
    pub n_cells: usize,
    pub samples: usize,
    #[serde(rename = "mean_F")]
    pub mean_f: f64,
    /// Sample standard deviation (zero for a single sample).
    #[serde(rename = "std_F")]
    pub std_f: f64,
    #[serde(rename = "F_hom")]
    pub f_hom: f64,
    /// `|mean_F - F_hom|`.
    pub abs_err: f64,
    /// Mean over samples of `|F - F_hom|`.
    #[serde(skip)]
    pub mean_abs_dev: f64,
}

/// Force statistics of random layered rods with ceramic probability
/// `params.vol_cer`, one row per entry of `n_cells_list`.
pub fn stochastic_force_experiment(
    params: &PhaseParams,
    l: f64,
    n_cells_list: &[usize],
    samples: usize,
    seed: u64,
) -> Result<Vec<StochasticRow>> {
    params.validate()?;
    if samples == 0 {
        return Err(EcmError::invalid("samples", "must be at least 1"));
    }
    let f_hom = l * kappa_hom(params);
    n_cells_list
        .iter()
        .enumerate()
        .map(|(row, &n_cells)| {
            let forces: Vec<f64> = (0..samples)
                .into_par_iter()
                .map(|s| {
                    let stream = ((row as u64) << 32) | s as u64;
                    let field = sample_stream(params, params.vol_cer, n_cells, seed, stream)?;
                    Ok(tensile_force_1d(&solve_tensile_1d(&field, l)))
                })
                .collect::<Result<_>>()?;
            let m = samples as f64;
            let mean_f = forces.iter().sum::<f64>() / m;
            let var = if samples > 1 {
                forces.iter().map(|f| (f - mean_f).powi(2)).sum::<f64>() / (m - 1.0)
            } else {
                0.0
            };
            let mean_abs_dev = forces.iter().map(|f| (f - f_hom).abs()).sum::<f64>() / m;
            Ok(StochasticRow {
                n_cells,
                samples,
                mean_f,
                std_f: var.sqrt(),
                f_hom,
                abs_err: (mean_f - f_hom).abs(),
                mean_abs_dev,
            })
        })
        .collect()
}
