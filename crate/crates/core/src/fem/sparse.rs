//! Compressed-row storage, Jacobi-preconditioned conjugate gradients and a
//! banded Cholesky factorization for the reduced tensile-test systems.

use crate::error::{EcmError, Result};

#[derive(Debug, Clone)]
pub struct CsrMatrix {
    pub nrows: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from per-row `(col, value)` lists; columns are sorted and
    /// duplicates summed.
    pub fn from_rows(nrows: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            let mut last: Option<usize> = None;
            for (c, v) in row {
                if last == Some(c) {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(c);
                    values.push(v);
                    last = Some(c);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            nrows,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()]
            .iter()
            .copied()
            .zip(self.values[r].iter().copied())
    }

    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.nrows) {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.values[k] * x[self.col_idx[k]];
            }
            *yi = s;
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows)
            .map(|i| self.row(i).find(|&(c, _)| c == i).map_or(0.0, |(_, v)| v))
            .collect()
    }

    /// Largest `|i - j|` over stored entries.
    pub fn half_bandwidth(&self) -> usize {
        (0..self.nrows)
            .flat_map(|i| self.row(i).map(move |(c, _)| i.abs_diff(c)))
            .max()
            .unwrap_or(0)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Convergence record of one linear solve.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SolveStats {
    pub iterations: usize,
    /// `||b - A x|| / ||b||` of the reduced system at exit.
    pub relative_residual: f64,
}

/// Solves `A x = b` for symmetric positive definite `A`, starting from `x`.
pub fn pcg(
    a: &CsrMatrix,
    b: &[f64],
    x: &mut [f64],
    rtol: f64,
    max_iter: usize,
) -> Result<SolveStats> {
    let n = a.nrows;
    let b_norm = norm(b);
    if b_norm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(SolveStats {
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let inv_diag: Vec<f64> = a
        .diagonal()
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();

    let mut r = vec![0.0; n];
    a.mul_vec(x, &mut r);
    r.iter_mut().zip(b).for_each(|(ri, bi)| *ri = bi - *ri);
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut res = norm(&r) / b_norm;

    let mut it = 0;
    while res > rtol {
        if it >= max_iter {
            return Err(EcmError::SolverNotConverged {
                iterations: it,
                residual: res,
            });
        }
        a.mul_vec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(EcmError::NotPositiveDefinite(it));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        it += 1;
        res = norm(&r) / b_norm;
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }

    // recompute the true residual; the recurrence drifts at tight tolerances
    a.mul_vec(x, &mut ap);
    let true_res = norm(
        &b.iter()
            .zip(&ap)
            .map(|(bi, ai)| bi - ai)
            .collect::<Vec<_>>(),
    ) / b_norm;
    Ok(SolveStats {
        iterations: it,
        relative_residual: true_res,
    })
}

/// Lower-triangular band Cholesky factor `A = L L^T`.
#[derive(Debug, Clone)]
pub struct BandCholesky {
    n: usize,
    bw: usize,
    /// row `i` holds `L[i][i - bw ..= i]`, left-padded when `i < bw`
    band: Vec<f64>,
}

impl BandCholesky {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.nrows;
        let bw = a.half_bandwidth();
        let w = bw + 1;
        let mut band = vec![0.0; n * w];
        for i in 0..n {
            for (c, v) in a.row(i) {
                if c <= i {
                    band[i * w + (c + bw - i)] = v;
                }
            }
        }
        for i in 0..n {
            let j_start = i.saturating_sub(bw);
            for j in j_start..=i {
                let k_start = j_start.max(j.saturating_sub(bw));
                let mut s = band[i * w + (j + bw - i)];
                let row_i = i * w + bw - i;
                let row_j = j * w + bw - j;
                for k in k_start..j {
                    s -= band[row_i + k] * band[row_j + k];
                }
                if i == j {
                    if s <= 0.0 {
                        return Err(EcmError::NotPositiveDefinite(i));
                    }
                    band[i * w + bw] = s.sqrt();
                } else {
                    band[i * w + (j + bw - i)] = s / band[j * w + bw];
                }
            }
        }
        Ok(Self { n, bw, band })
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        for i in 0..n {
            let mut s = x[i];
            let base = i * w + bw - i;
            for k in i.saturating_sub(bw)..i {
                s -= self.band[base + k] * x[k];
            }
            x[i] = s / self.band[i * w + bw];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n.min(i + bw + 1) {
                s -= self.band[k * w + bw - k + i] * x[k];
            }
            x[i] = s / self.band[i * w + bw];
        }
    }
}
