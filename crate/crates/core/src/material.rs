//! Phase parameters and the piecewise-constant material fields consumed by
//! the 1D and 2D solvers.

use serde::{Deserialize, Serialize};

use crate::error::{EcmError, Result};
use crate::fem::Mesh2D;
use crate::geometry::{disk_rect_area, EmbeddedCellGeometry2D};

/// Material constants of a two-phase metal/ceramic composite.
///
/// The 1D solvers read `kappa_*`; the 2D solvers read `lambda_*` and `mu`.
/// The ceramic Lamé parameter is always `lambda_met + eps * d_c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseParams {
    pub kappa_met: f64,
    pub kappa_cer: f64,
    pub lambda_met: f64,
    pub lambda_cer: f64,
    pub mu: f64,
    pub eps: f64,
    pub d_c: f64,
    pub vol_cer: f64,
}

impl PhaseParams {
    /// Parameters for the 1D longitudinal problem.
    pub fn longitudinal(kappa_met: f64, kappa_cer: f64, vol_cer: f64) -> Result<Self> {
        let p = Self {
            kappa_met,
            kappa_cer,
            lambda_met: 0.0,
            lambda_cer: 0.0,
            mu: 1.0,
            eps: 0.0,
            d_c: 0.0,
            vol_cer,
        };
        p.validate()?;
        Ok(p)
    }

    /// Parameters for the 2D problem with `lambda_cer = lambda_met + eps d_c`.
    /// The longitudinal moduli are set to `lambda + 2 mu`.
    pub fn perturbed(lambda_met: f64, mu: f64, eps: f64, d_c: f64, vol_cer: f64) -> Result<Self> {
        let lambda_cer = lambda_met + eps * d_c;
        let p = Self {
            kappa_met: lambda_met + 2.0 * mu,
            kappa_cer: lambda_cer + 2.0 * mu,
            lambda_met,
            lambda_cer,
            mu,
            eps,
            d_c,
            vol_cer,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn vol_met(&self) -> f64 {
        1.0 - self.vol_cer
    }

    /// Same parameters with a different perturbation size.
    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        Self::perturbed(self.lambda_met, self.mu, eps, self.d_c, self.vol_cer)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(EcmError::invalid(
                    name,
                    format!("must be positive and finite, got {v}"),
                ))
            }
        };
        let non_negative = |name, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(EcmError::invalid(
                    name,
                    format!("must be non-negative and finite, got {v}"),
                ))
            }
        };
        positive("kappa_met", self.kappa_met)?;
        positive("kappa_cer", self.kappa_cer)?;
        positive("mu", self.mu)?;
        non_negative("lambda_met", self.lambda_met)?;
        non_negative("lambda_cer", self.lambda_cer)?;
        non_negative("eps", self.eps)?;
        if !self.d_c.is_finite() {
            return Err(EcmError::invalid("d_c", "must be finite"));
        }
        if self.lambda_cer != self.lambda_met + self.eps * self.d_c {
            return Err(EcmError::invalid(
                "lambda_cer",
                "must equal lambda_met + eps * d_c",
            ));
        }
        if !(0.0..=1.0).contains(&self.vol_cer) {
            return Err(EcmError::invalid(
                "vol_cer",
                format!("must lie in [0, 1], got {}", self.vol_cer),
            ));
        }
        Ok(())
    }

    /// Volume-averaged longitudinal modulus.
    pub fn kappa_average(&self) -> f64 {
        self.vol_cer * self.kappa_cer + self.vol_met() * self.kappa_met
    }

    /// Volume-averaged first Lamé parameter.
    pub fn lambda_average(&self) -> f64 {
        self.vol_cer * self.lambda_cer + self.vol_met() * self.lambda_met
    }
}

/// Measure of the set where a field takes `value`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseMeasure {
    pub value: f64,
    pub measure: f64,
}

/// Fields that can report per-value measures.
pub trait PhaseField {
    /// Pairs `(value, measure)` in arbitrary order, possibly repeated.
    fn pieces(&self) -> Vec<(f64, f64)>;
}

/// Total measure per distinct value, sorted by value.
pub fn volume_fractions<F: PhaseField + ?Sized>(field: &F) -> Vec<PhaseMeasure> {
    let mut pieces = field.pieces();
    pieces.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<PhaseMeasure> = Vec::new();
    for (value, measure) in pieces {
        match out.last_mut() {
            Some(last) if last.value == value => last.measure += measure,
            _ => out.push(PhaseMeasure { value, measure }),
        }
    }
    out
}

/// Piecewise-constant modulus on a partition of `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialField1D {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl MaterialField1D {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.len() != values.len() + 1 || values.is_empty() {
            return Err(EcmError::Shape(format!(
                "{} breakpoints for {} values",
                breakpoints.len(),
                values.len()
            )));
        }
        if breakpoints[0] != 0.0 || *breakpoints.last().unwrap() != 1.0 {
            return Err(EcmError::invalid(
                "breakpoints",
                "must start at 0 and end at 1",
            ));
        }
        if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(EcmError::invalid(
                "breakpoints",
                "must be strictly increasing",
            ));
        }
        if values.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(EcmError::invalid(
                "values",
                "moduli must be positive and finite",
            ));
        }
        Ok(Self {
            breakpoints,
            values,
        })
    }

    /// Builds from `(right end, value)` pieces, dropping empty intervals.
    fn from_pieces(pieces: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut breakpoints = vec![0.0];
        let mut values = Vec::new();
        for (end, value) in pieces {
            if end > *breakpoints.last().unwrap() {
                breakpoints.push(end);
                values.push(value);
            }
        }
        Self::new(breakpoints, values)
    }

    pub fn homogeneous(value: f64) -> Result<Self> {
        Self::new(vec![0.0, 1.0], vec![value])
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `(length, value)` for each interval.
    pub fn intervals(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.breakpoints
            .windows(2)
            .zip(&self.values)
            .map(|(w, &v)| (w[1] - w[0], v))
    }

    /// Value on the half-open interval containing `x` (the last interval is closed).
    pub fn value_at(&self, x: f64) -> f64 {
        let k = self.breakpoints.partition_point(|&b| b <= x);
        self.values[k.clamp(1, self.values.len()) - 1]
    }
}

impl PhaseField for MaterialField1D {
    fn pieces(&self) -> Vec<(f64, f64)> {
        self.intervals().map(|(len, v)| (v, len)).collect()
    }
}

/// Left end of the 1D embedded cell.
pub const CELL_START_1D: f64 = 0.4;
/// Right end of the 1D embedded cell.
pub const CELL_END_1D: f64 = 0.6;

/// Dummy material on `[0, 0.4) ∪ [0.6, 1]` with a metal cell on `[0.4, 0.6)`
/// whose centred subinterval of length `vol_cer / 5` is ceramic.
pub fn build_ecm_kappa_1d(params: &PhaseParams, kappa_dummy: f64) -> Result<MaterialField1D> {
    params.validate()?;
    if !(kappa_dummy > 0.0 && kappa_dummy.is_finite()) {
        return Err(EcmError::invalid(
            "kappa_dummy",
            format!("must be positive and finite, got {kappa_dummy}"),
        ));
    }
    let half = params.vol_cer / 10.0;
    MaterialField1D::from_pieces([
        (CELL_START_1D, kappa_dummy),
        (0.5 - half, params.kappa_met),
        (0.5 + half, params.kappa_cer),
        (CELL_END_1D, params.kappa_met),
        (1.0, kappa_dummy),
    ])
}

/// `n_periods` repetitions of a metal interval of relative length `vol_met`
/// followed by ceramic.
pub fn build_periodic_kappa_1d(params: &PhaseParams, n_periods: usize) -> Result<MaterialField1D> {
    params.validate()?;
    if n_periods == 0 {
        return Err(EcmError::invalid("n_periods", "must be at least 1"));
    }
    let n = n_periods as f64;
    let pieces = (0..n_periods).flat_map(|k| {
        let start = k as f64 / n;
        let end = if k + 1 == n_periods {
            1.0
        } else {
            (k + 1) as f64 / n
        };
        [
            (start + params.vol_met() / n, params.kappa_met),
            (end, params.kappa_cer),
        ]
    });
    MaterialField1D::from_pieces(pieces)
}

/// One first Lamé parameter per element of a uniform mesh plus a constant
/// shear modulus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialField2D {
    mesh_n: usize,
    lambda_per_element: Vec<f64>,
    mu: f64,
}

impl MaterialField2D {
    pub fn new(mesh: Mesh2D, lambda_per_element: Vec<f64>, mu: f64) -> Result<Self> {
        if lambda_per_element.len() != mesh.num_elements() {
            return Err(EcmError::Shape(format!(
                "{} lambda values for {} elements",
                lambda_per_element.len(),
                mesh.num_elements()
            )));
        }
        if lambda_per_element
            .iter()
            .any(|&v| !(v >= 0.0 && v.is_finite()))
        {
            return Err(EcmError::invalid(
                "lambda",
                "must be non-negative and finite",
            ));
        }
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(EcmError::invalid(
                "mu",
                format!("must be positive, got {mu}"),
            ));
        }
        Ok(Self {
            mesh_n: mesh.n(),
            lambda_per_element,
            mu,
        })
    }

    pub fn homogeneous(mesh: Mesh2D, lambda: f64, mu: f64) -> Result<Self> {
        Self::new(mesh, vec![lambda; mesh.num_elements()], mu)
    }

    pub fn mesh(&self) -> Mesh2D {
        Mesh2D::new(self.mesh_n).expect("validated at construction")
    }

    pub fn mesh_n(&self) -> usize {
        self.mesh_n
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda_per_element
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// `∫ λ dx`.
    pub fn integral(&self) -> f64 {
        let h = 1.0 / self.mesh_n as f64;
        self.lambda_per_element.iter().sum::<f64>() * h * h
    }

    pub fn max_abs(&self) -> f64 {
        self.lambda_per_element
            .iter()
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl PhaseField for MaterialField2D {
    fn pieces(&self) -> Vec<(f64, f64)> {
        let cell = 1.0 / self.lambda_per_element.len() as f64;
        self.lambda_per_element.iter().map(|&v| (v, cell)).collect()
    }
}

/// How an element whose square straddles a phase boundary gets its value.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseAssignment {
    /// Phase of the element centroid.
    #[default]
    Centroid,
    /// Area-weighted average of the phases covering the element, using the
    /// exact disk/square intersection.
    AreaFraction,
}

/// Embedded-cell field with centroid phase assignment.
pub fn build_ecm_lambda_2d(
    mesh: Mesh2D,
    params: &PhaseParams,
    geometry: &EmbeddedCellGeometry2D,
    lambda_dummy: f64,
) -> Result<MaterialField2D> {
    build_ecm_lambda_2d_with(
        mesh,
        params,
        geometry,
        lambda_dummy,
        PhaseAssignment::Centroid,
    )
}

pub fn build_ecm_lambda_2d_with(
    mesh: Mesh2D,
    params: &PhaseParams,
    geometry: &EmbeddedCellGeometry2D,
    lambda_dummy: f64,
    assignment: PhaseAssignment,
) -> Result<MaterialField2D> {
    if mesh.element_diameter() > geometry.r1 {
        return Err(EcmError::Resolution(format!(
            "element diameter {:.4} exceeds the ceramic radius {:.4}",
            mesh.element_diameter(),
            geometry.r1
        )));
    }
    build_ecm_lambda_unchecked(mesh, params, geometry, lambda_dummy, assignment)
}

/// Same as [`build_ecm_lambda_2d_with`] without the resolution check, for
/// single-phase cells.
pub(crate) fn build_ecm_lambda_unchecked(
    mesh: Mesh2D,
    params: &PhaseParams,
    geometry: &EmbeddedCellGeometry2D,
    lambda_dummy: f64,
    assignment: PhaseAssignment,
) -> Result<MaterialField2D> {
    params.validate()?;
    if !(lambda_dummy >= 0.0 && lambda_dummy.is_finite()) {
        return Err(EcmError::invalid(
            "lambda_dummy",
            format!("must be non-negative and finite, got {lambda_dummy}"),
        ));
    }
    let lambda = cell_fractions(mesh, geometry, assignment)
        .into_iter()
        .map(|[cer, met, dummy]| {
            cer * params.lambda_cer + met * params.lambda_met + dummy * lambda_dummy
        })
        .collect();
    MaterialField2D::new(mesh, lambda, params.mu)
}

/// Per-element `[ceramic, metal, dummy]` fractions of the embedded cell.
/// Centroid assignment gives one-hot rows; the rows always sum to one.
pub fn cell_fractions(
    mesh: Mesh2D,
    geometry: &EmbeddedCellGeometry2D,
    assignment: PhaseAssignment,
) -> Vec<[f64; 3]> {
    (0..mesh.num_elements())
        .map(|e| match assignment {
            PhaseAssignment::Centroid => {
                let c = mesh.element_centroid(e);
                if geometry.in_ceramic(c) {
                    [1.0, 0.0, 0.0]
                } else if geometry.in_cell(c) {
                    [0.0, 1.0, 0.0]
                } else {
                    [0.0, 0.0, 1.0]
                }
            }
            PhaseAssignment::AreaFraction => {
                let [x0, x1, y0, y1] = mesh.element_bounds(e);
                let area = mesh.h() * mesh.h();
                let cell =
                    (disk_rect_area(geometry.center, geometry.r2, x0, x1, y0, y1) / area).min(1.0);
                let cer =
                    (disk_rect_area(geometry.center, geometry.r1, x0, x1, y0, y1) / area).min(cell);
                [cer, cell - cer, 1.0 - cell]
            }
        })
        .collect()
}

/// Square array of ceramic disks with period `delta = 1/k`, each disk
/// covering the fraction `inclusion_vol` of its period cell.
pub fn build_periodic_lambda_2d(
    mesh: Mesh2D,
    params: &PhaseParams,
    delta: f64,
    inclusion_vol: f64,
) -> Result<MaterialField2D> {
    build_periodic_lambda_2d_with(
        mesh,
        params,
        delta,
        inclusion_vol,
        PhaseAssignment::Centroid,
    )
}

/// Minimum number of elements per period along each axis.
pub const MIN_ELEMENTS_PER_PERIOD: usize = 8;

pub fn build_periodic_lambda_2d_with(
    mesh: Mesh2D,
    params: &PhaseParams,
    delta: f64,
    inclusion_vol: f64,
    assignment: PhaseAssignment,
) -> Result<MaterialField2D> {
    params.validate()?;
    let periods = periods_per_side(delta)?;
    if !(0.0..=std::f64::consts::FRAC_PI_4).contains(&inclusion_vol) {
        return Err(EcmError::invalid(
            "inclusion_vol",
            format!("a centred disk covers at most pi/4 of its cell, got {inclusion_vol}"),
        ));
    }
    let n = mesh.n();
    if n % periods != 0 || n / periods < MIN_ELEMENTS_PER_PERIOD {
        return Err(EcmError::Resolution(format!(
            "{n} elements per side cannot resolve {periods} periods with at least \
             {MIN_ELEMENTS_PER_PERIOD} elements each"
        )));
    }
    let per = n / periods;
    let h = mesh.h();
    // local geometry of one period cell, in element units so that every
    // period sees bit-identical values
    let half = 0.5 * per as f64 * h;
    let radius = per as f64 * h * (inclusion_vol / std::f64::consts::PI).sqrt();
    let disk_center = [half, half];
    let local_value = |li: usize, lj: usize| -> f64 {
        match assignment {
            PhaseAssignment::Centroid => {
                let cx = (li as f64 + 0.5) * h - half;
                let cy = (lj as f64 + 0.5) * h - half;
                if cx.hypot(cy) <= radius && radius > 0.0 {
                    params.lambda_cer
                } else {
                    params.lambda_met
                }
            }
            PhaseAssignment::AreaFraction => {
                let (x0, y0) = (li as f64 * h, lj as f64 * h);
                let frac = disk_rect_area(disk_center, radius, x0, x0 + h, y0, y0 + h) / (h * h);
                params.lambda_met + frac * (params.lambda_cer - params.lambda_met)
            }
        }
    };
    let table: Vec<f64> = (0..per * per)
        .map(|k| local_value(k % per, k / per))
        .collect();
    let lambda = (0..mesh.num_elements())
        .map(|e| {
            let (i, j) = mesh.element_ij(e);
            table[(j % per) * per + i % per]
        })
        .collect();
    MaterialField2D::new(mesh, lambda, params.mu)
}

/// `k` with `delta = 1/k`.
pub fn periods_per_side(delta: f64) -> Result<usize> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(EcmError::invalid(
            "delta",
            format!("must lie in (0, 1], got {delta}"),
        ));
    }
    let k = (1.0 / delta).round();
    if ((k * delta) - 1.0).abs() > 1e-9 {
        return Err(EcmError::Resolution(format!(
            "delta = {delta} does not divide the unit interval"
        )));
    }
    Ok(k as usize)
}
