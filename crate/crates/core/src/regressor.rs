//! Linear model on the selected points and the relative prediction error.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::data::Grid;
use crate::error::{Error, Result};
use crate::estimators::MomentEstimates;
use crate::linalg::{cholesky, cholesky_solve};

/// `Ŷ = α̂ + Σ_j β̂_j X(t_j)` with `β̂ = Σ̂_T⁻¹ ĉ_T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearPredictor {
    pub indices: Vec<usize>,
    pub times: Vec<f64>,
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub train_n: usize,
}

/// Solves the normal equations on `indices`; the intercept makes the mean
/// training prediction equal `Ȳ`.
pub fn fit(est: &MomentEstimates, grid: &Grid, indices: &[usize]) -> Result<LinearPredictor> {
    let (sigma, c) = est.submatrix(indices)?;
    let p = indices.len();
    let coefficients = if p == 0 {
        Vec::new()
    } else {
        let l = cholesky(&sigma, p)?;
        cholesky_solve(&l, p, &c)
    };
    if coefficients.iter().any(|b| !b.is_finite()) {
        return Err(Error::NotPositiveDefinite { minor: p });
    }
    let mean = est.mean_curve();
    let intercept = est.response_mean()
        - indices
            .iter()
            .zip(&coefficients)
            .map(|(&k, b)| b * mean[k])
            .sum::<f64>();
    Ok(LinearPredictor {
        indices: indices.to_vec(),
        times: indices.iter().map(|&k| grid.time(k)).collect(),
        coefficients,
        intercept,
        train_n: est.n(),
    })
}

impl LinearPredictor {
    /// Predicts one response per row of `paths`, which must be sampled on a
    /// grid carrying the fitted times at the fitted indices.
    pub fn predict(&self, grid: &Grid, paths: &DMatrix<f64>) -> Result<Vec<f64>> {
        if paths.ncols() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                actual: paths.ncols(),
            });
        }
        for (&k, &t) in self.indices.iter().zip(&self.times) {
            let actual = if k < grid.len() { grid.time(k) } else { f64::NAN };
            if !((actual - t).abs() <= 1e-9) {
                return Err(Error::GridMismatch {
                    index: k,
                    expected: t,
                    actual,
                });
            }
        }
        Ok((0..paths.nrows())
            .map(|i| {
                self.intercept
                    + self
                        .indices
                        .iter()
                        .zip(&self.coefficients)
                        .map(|(&k, b)| b * paths[(i, k)])
                        .sum::<f64>()
            })
            .collect())
    }
}

pub fn predict(pred: &LinearPredictor, grid: &Grid, paths: &DMatrix<f64>) -> Result<Vec<f64>> {
    pred.predict(grid, paths)
}

/// `Σ(Ŷᵢ − Yᵢ)² / Σ Yᵢ²`.
pub fn rmse(predicted: &[f64], actual: &[f64]) -> Result<f64> {
    if predicted.len() != actual.len() {
        return Err(Error::DimensionMismatch {
            expected: actual.len(),
            actual: predicted.len(),
        });
    }
    let denom: f64 = actual.iter().map(|y| y * y).sum();
    if !(denom > 0.0) {
        return Err(Error::InvalidArgument("actual responses are all zero".into()));
    }
    let num: f64 = predicted
        .iter()
        .zip(actual)
        .map(|(p, y)| (p - y).powi(2))
        .sum();
    Ok(num / denom)
}
