//! Sample moments on the training grid.
//!
//! Covariances use divisor `n`:
//! `Ĉov(X(s), X(t)) = n⁻¹ Σ Xᵢ(s)Xᵢ(t) − X̄(s)X̄(t)`,
//! evaluated from centered columns and computed lazily per entry.

use nalgebra::DMatrix;

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Second-order moments the selector needs: a covariance over grid indices
/// and a cross-covariance with the response.
pub trait Moments: Sync {
    /// Number of grid points.
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `Cov(X(t_i), X(t_j))`.
    fn cov(&self, i: usize, j: usize) -> f64;

    /// `Cov(X(t_i), Y)`.
    fn cross_cov(&self, i: usize) -> f64;

    fn variance(&self, i: usize) -> f64 {
        self.cov(i, i)
    }

    /// `max_i Var X(t_i)`.
    fn max_variance(&self) -> f64 {
        (0..self.len()).map(|i| self.variance(i)).fold(0.0, f64::max)
    }

    /// Covariance column `(Cov(X(t_k), X(t_j)))_j` over the whole grid.
    fn cov_column(&self, k: usize) -> Vec<f64> {
        (0..self.len()).map(|j| self.cov(k, j)).collect()
    }
}

/// Sample moments of a training set.
#[derive(Debug, Clone)]
pub struct MomentEstimates {
    mean_curve: Vec<f64>,
    response_mean: f64,
    cross_cov: Vec<f64>,
    variances: Vec<f64>,
    /// Column-centered trajectories, n×m.
    centered: DMatrix<f64>,
    centered_response: Vec<f64>,
}

/// Estimates mean curve, response mean, variances and `ĉ(t)`.
pub fn estimate_moments(train: &Dataset) -> Result<MomentEstimates> {
    let n = train.n();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "moment estimation needs n >= 2, got {n}"
        )));
    }
    let x = train.trajectories();
    let nf = n as f64;
    let mean_curve: Vec<f64> = x.column_iter().map(|c| c.sum() / nf).collect();
    let response_mean = train.responses().iter().sum::<f64>() / nf;
    let centered_response: Vec<f64> = train.responses().iter().map(|y| y - response_mean).collect();
    let mut centered = x.clone();
    for (mut col, mu) in centered.column_iter_mut().zip(&mean_curve) {
        col.add_scalar_mut(-mu);
    }
    let cross_cov = centered
        .column_iter()
        .map(|c| c.iter().zip(&centered_response).map(|(a, b)| a * b).sum::<f64>() / nf)
        .collect();
    let variances = centered
        .column_iter()
        .map(|c| c.norm_squared() / nf)
        .collect();
    Ok(MomentEstimates {
        mean_curve,
        response_mean,
        cross_cov,
        variances,
        centered,
        centered_response,
    })
}

impl MomentEstimates {
    pub fn n(&self) -> usize {
        self.centered.nrows()
    }

    pub fn mean_curve(&self) -> &[f64] {
        &self.mean_curve
    }

    pub fn response_mean(&self) -> f64 {
        self.response_mean
    }

    pub fn cross_cov_curve(&self) -> &[f64] {
        &self.cross_cov
    }

    /// Centered trajectory values at grid index `k` (length n).
    pub fn centered_column(&self, k: usize) -> &[f64] {
        let n = self.n();
        &self.centered.as_slice()[k * n..(k + 1) * n]
    }

    /// `Yᵢ − Ȳ`.
    pub fn centered_response(&self) -> &[f64] {
        &self.centered_response
    }

    /// Σ̂ and ĉ restricted to `indices`, in the given order.
    pub fn submatrix(&self, indices: &[usize]) -> Result<(Vec<f64>, Vec<f64>)> {
        submatrix(self, indices)
    }
}

impl Moments for MomentEstimates {
    fn len(&self) -> usize {
        self.mean_curve.len()
    }

    fn cov(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.variances[i];
        }
        let (a, b) = (self.centered_column(i), self.centered_column(j));
        a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / self.n() as f64
    }

    fn cross_cov(&self, i: usize) -> f64 {
        self.cross_cov[i]
    }

    fn variance(&self, i: usize) -> f64 {
        self.variances[i]
    }
}

/// Known population moments, used as an exact oracle for the selector.
#[derive(Debug, Clone)]
pub struct PopulationMoments {
    cov: Vec<f64>,
    cross: Vec<f64>,
}

impl PopulationMoments {
    /// Builds the m×m covariance from a kernel evaluated on `times`.
    pub fn from_kernel(times: &[f64], kernel: impl Fn(f64, f64) -> f64, cross: Vec<f64>) -> Result<Self> {
        let m = times.len();
        if cross.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                actual: cross.len(),
            });
        }
        let mut cov = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..=i {
                let v = kernel(times[i], times[j]);
                cov[i * m + j] = v;
                cov[j * m + i] = v;
            }
        }
        Ok(Self { cov, cross })
    }

    /// Moments of a sparse model `Y = Σ β_j X(t*_j) + ε`:
    /// `c(t) = Σ β_j K(t, t*_j)`.
    pub fn sparse_model(
        times: &[f64],
        kernel: impl Fn(f64, f64) -> f64,
        points: &[f64],
        weights: &[f64],
    ) -> Result<Self> {
        let cross = times
            .iter()
            .map(|&t| points.iter().zip(weights).map(|(&p, &b)| b * kernel(t, p)).sum())
            .collect();
        Self::from_kernel(times, kernel, cross)
    }
}

impl Moments for PopulationMoments {
    fn len(&self) -> usize {
        self.cross.len()
    }

    fn cov(&self, i: usize, j: usize) -> f64 {
        self.cov[i * self.cross.len() + j]
    }

    fn cross_cov(&self, i: usize) -> f64 {
        self.cross[i]
    }
}

/// Restriction of the covariance (row-major p×p) and cross-covariance to
/// `indices`, order-preserving.
pub fn submatrix<M: Moments + ?Sized>(est: &M, indices: &[usize]) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = est.len();
    for (k, &i) in indices.iter().enumerate() {
        if i >= m {
            return Err(Error::InvalidArgument(format!(
                "index {i} out of range for grid of {m}"
            )));
        }
        if indices[..k].contains(&i) {
            return Err(Error::InvalidArgument(format!("duplicate index {i}")));
        }
    }
    let p = indices.len();
    let mut sigma = vec![0.0; p * p];
    for a in 0..p {
        for b in 0..=a {
            let v = est.cov(indices[a], indices[b]);
            sigma[a * p + b] = v;
            sigma[b * p + a] = v;
        }
    }
    let c = indices.iter().map(|&i| est.cross_cov(i)).collect();
    Ok((sigma, c))
}
