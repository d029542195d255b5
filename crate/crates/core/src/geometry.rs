//! Embedded-cell geometry and exact disk/rectangle intersection areas.

use serde::{Deserialize, Serialize};

use crate::error::{EcmError, Result};

/// Largest admissible outer radius of the embedded cell.
pub const MAX_CELL_RADIUS: f64 = 0.1;

/// Ceramic disk of radius `r1` inside a metal annulus of outer radius `r2`,
/// both centred at `center`. Everything outside the annulus is dummy material.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmbeddedCellGeometry2D {
    pub center: [f64; 2],
    pub r1: f64,
    pub r2: f64,
}

impl EmbeddedCellGeometry2D {
    /// Builds a cell from explicit radii, checking `0 < r1 <= r2 <= 0.1`.
    pub fn new(r1: f64, r2: f64) -> Result<Self> {
        if !(r1 > 0.0 && r1 <= r2 && r2 <= MAX_CELL_RADIUS) {
            return Err(EcmError::DegenerateGeometry(format!(
                "radii must satisfy 0 < r1 <= r2 <= {MAX_CELL_RADIUS}, got r1 = {r1}, r2 = {r2}"
            )));
        }
        Ok(Self {
            center: [0.5, 0.5],
            r1,
            r2,
        })
    }

    /// Single-phase cells (`vol_cer` of exactly 0 or 1). Not reachable through
    /// [`solve_ecm_radii`], which rejects them.
    pub(crate) fn single_phase(vol_cer: f64) -> Self {
        let r1 = if vol_cer >= 1.0 { MAX_CELL_RADIUS } else { 0.0 };
        Self {
            center: [0.5, 0.5],
            r1,
            r2: MAX_CELL_RADIUS,
        }
    }

    pub fn ceramic_area(&self) -> f64 {
        std::f64::consts::PI * self.r1 * self.r1
    }

    pub fn metal_area(&self) -> f64 {
        std::f64::consts::PI * (self.r2 * self.r2 - self.r1 * self.r1)
    }

    /// Ceramic-to-metal area ratio of the cell.
    pub fn area_ratio(&self) -> f64 {
        self.ceramic_area() / self.metal_area()
    }

    fn dist(&self, p: [f64; 2]) -> f64 {
        (p[0] - self.center[0]).hypot(p[1] - self.center[1])
    }

    pub(crate) fn in_ceramic(&self, p: [f64; 2]) -> bool {
        self.r1 > 0.0 && self.dist(p) <= self.r1
    }

    pub(crate) fn in_cell(&self, p: [f64; 2]) -> bool {
        self.dist(p) <= self.r2
    }
}

/// Radii of the embedded cell for a ceramic volume fraction.
///
/// The outer radius is pinned to its largest admissible value and the inner
/// radius follows from `pi r1^2 / (pi (r2^2 - r1^2)) = vol_cer / vol_met`.
pub fn solve_ecm_radii(vol_cer: f64) -> Result<EmbeddedCellGeometry2D> {
    if !(vol_cer > 0.0 && vol_cer < 1.0) {
        return Err(EcmError::DegenerateGeometry(format!(
            "ceramic volume fraction must lie in (0, 1), got {vol_cer}"
        )));
    }
    let r2 = MAX_CELL_RADIUS;
    EmbeddedCellGeometry2D::new(r2 * vol_cer.sqrt(), r2)
}

/// Antiderivative of `sqrt(r^2 - t^2)` on `[-r, r]`.
fn half_chord_primitive(t: f64, r: f64) -> f64 {
    let t = t.clamp(-r, r);
    let s = half_chord(t, r);
    0.5 * (t * s + r * r * t.atan2(s))
}

/// `sqrt(r^2 - t^2)`, factored so that it stays accurate for `|t|` near `r`.
fn half_chord(t: f64, r: f64) -> f64 {
    ((r - t.abs()) * (r + t.abs())).max(0.0).sqrt()
}

/// Exact area of `B_r(center) ∩ [x0, x1] x [y0, y1]`.
///
/// The vertical extent of the intersection, as a function of `x`, is
/// piecewise one of `const`, `±sqrt(r^2 - t^2) + const`; the interval is split
/// at every kink and each piece is integrated in closed form.
pub fn disk_rect_area(center: [f64; 2], r: f64, x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
    if r <= 0.0 || x1 <= x0 || y1 <= y0 {
        return 0.0;
    }
    // shift to a disk centred at the origin
    let (x0, x1) = (x0 - center[0], x1 - center[0]);
    let (y0, y1) = (y0 - center[1], y1 - center[1]);
    let a = x0.max(-r);
    let b = x1.min(r);
    if b <= a {
        return 0.0;
    }

    let mut cuts = vec![a, b];
    for y in [y0, y1] {
        if y.abs() < r {
            let t = half_chord(y, r);
            cuts.extend([-t, t]);
        }
    }
    cuts.retain(|&t| t >= a && t <= b);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let s_at = |t: f64| half_chord(t, r);
    let mut area = 0.0;
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi <= lo {
            continue;
        }
        let s_mid = s_at(0.5 * (lo + hi));
        let upper_is_circle = s_mid < y1;
        let lower_is_circle = -s_mid > y0;
        let upper_mid = if upper_is_circle { s_mid } else { y1 };
        let lower_mid = if lower_is_circle { -s_mid } else { y0 };
        if upper_mid <= lower_mid {
            continue;
        }
        let circle = half_chord_primitive(hi, r) - half_chord_primitive(lo, r);
        let width = hi - lo;
        let upper = if upper_is_circle { circle } else { y1 * width };
        let lower = if lower_is_circle { -circle } else { y0 * width };
        area += upper - lower;
    }
    area.max(0.0)
}
