//! Small dense Cholesky routines.
//!
//! Matrices are row-major `&[f64]` slices of length `n * n`. Only the lower
//! triangle of the input is read.

use crate::error::{Error, Result};

/// Lower-triangular factor `L` with `A = L·Lᵀ`.
///
/// Fails with the 1-based index of the first leading minor that is not
/// positive.
pub fn cholesky(a: &[f64], n: usize) -> Result<Vec<f64>> {
    debug_assert_eq!(a.len(), n * n);
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i * n + j];
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(sum > 0.0) || !sum.is_finite() {
                    return Err(Error::NotPositiveDefinite { minor: i + 1 });
                }
                l[i * n + i] = sum.sqrt();
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    Ok(l)
}

/// Solves `L·x = b` in place.
pub fn forward_substitute(l: &[f64], n: usize, b: &mut [f64]) {
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[i * n + k] * b[k];
        }
        b[i] = sum / l[i * n + i];
    }
}

/// Solves `Lᵀ·x = b` in place.
pub fn back_substitute(l: &[f64], n: usize, b: &mut [f64]) {
    for i in (0..n).rev() {
        let mut sum = b[i];
        for k in (i + 1)..n {
            sum -= l[k * n + i] * b[k];
        }
        b[i] = sum / l[i * n + i];
    }
}

/// Solves `A·x = b` given the Cholesky factor of `A`.
pub fn cholesky_solve(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut x = b.to_vec();
    forward_substitute(l, n, &mut x);
    back_substitute(l, n, &mut x);
    x
}

/// Cholesky factor that grows by one row and column at a time.
///
/// Rows are stored packed: row `i` holds `i + 1` entries.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GrowingCholesky {
    rows: Vec<Vec<f64>>,
}

impl GrowingCholesky {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// Solves `L·z = v` for a vector of length `dim()`.
    pub fn forward(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.dim());
        let mut z = Vec::with_capacity(v.len());
        for (i, row) in self.rows.iter().enumerate() {
            let mut sum = v[i];
            for (k, zk) in z.iter().enumerate() {
                sum -= row[k] * zk;
            }
            z.push(sum / row[i]);
        }
        z
    }

    /// Solves `Lᵀ·x = b` for a vector of length `dim()`.
    pub fn backward(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut x = b.to_vec();
        for i in (0..n).rev() {
            let mut sum = x[i];
            for k in (i + 1)..n {
                sum -= self.rows[k][i] * x[k];
            }
            x[i] = sum / self.rows[i][i];
        }
        x
    }

    /// Appends a row given `z = L⁻¹·v` (the new off-diagonal column) and the
    /// Schur complement `d = a - zᵀz`, which must be positive.
    pub fn push(&mut self, z: Vec<f64>, schur: f64) -> Result<()> {
        if z.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: z.len(),
            });
        }
        if !(schur > 0.0) {
            return Err(Error::NotPositiveDefinite {
                minor: self.dim() + 1,
            });
        }
        let mut row = z;
        row.push(schur.sqrt());
        self.rows.push(row);
        Ok(())
    }

    /// Dense row-major copy of `L`.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.dim();
        let mut out = vec![0.0; n * n];
        for (i, row) in self.rows.iter().enumerate() {
            out[i * n..i * n + row.len()].copy_from_slice(row);
        }
        out
    }
}
