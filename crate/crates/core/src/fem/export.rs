//! Legacy-VTK structured-points export.

use std::fmt::Write as _;

use super::field::DisplacementField;
use crate::material::MaterialField2D;

/// Renders a displacement (and optionally the Lamé field) as an ASCII VTK
/// structured-points document.
pub fn to_vtk(u: &DisplacementField, field: Option<&MaterialField2D>) -> String {
    let n = u.mesh_n;
    let h = 1.0 / n as f64;
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0");
    let _ = writeln!(s, "tensile test, l = {}", u.l);
    let _ = writeln!(s, "ASCII\nDATASET STRUCTURED_POINTS");
    let _ = writeln!(s, "DIMENSIONS {} {} 1", n + 1, n + 1);
    let _ = writeln!(s, "ORIGIN 0 0 0\nSPACING {h} {h} 1");
    let _ = writeln!(s, "POINT_DATA {}", u.u1.len());
    let _ = writeln!(s, "VECTORS displacement double");
    for (a, b) in u.u1.iter().zip(&u.u2) {
        let _ = writeln!(s, "{a:e} {b:e} 0");
    }
    if let Some(f) = field.filter(|f| f.mesh_n() == n) {
        let _ = writeln!(s, "CELL_DATA {}", f.lambda().len());
        let _ = writeln!(s, "SCALARS lambda double 1\nLOOKUP_TABLE default");
        for v in f.lambda() {
            let _ = writeln!(s, "{v:e}");
        }
    }
    s
}
