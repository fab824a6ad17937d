//! Benchmark processes and the regression models that generate responses.
//!
//! Gaussian kinds are simulated exactly on the grid from a Cholesky factor of
//! the covariance matrix. Geometric Brownian motion is the pointwise
//! exponential of a Brownian draw.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::Grid;
use crate::error::{Error, Result};
use crate::linalg::cholesky;
use crate::seeded_rng;

/// Parameters of the Ornstein-Uhlenbeck SDE `dX = θ(μ - X)dt + σ dB`, `X(0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OuParams {
    pub theta: f64,
    pub mu: f64,
    pub sigma: f64,
}

impl Default for OuParams {
    fn default() -> Self {
        Self {
            theta: 1.0,
            mu: 1.0,
            sigma: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ProcessSpec {
    /// Standard Brownian motion.
    Bm,
    /// Geometric Brownian motion `exp(B(t))`.
    Gbm,
    /// Integrated Brownian motion `∫₀ᵗ B(s) ds`.
    Ibm,
    Ou(OuParams),
    Fbm { hurst: f64 },
}

impl ProcessSpec {
    pub fn fbm(hurst: f64) -> Result<Self> {
        let spec = ProcessSpec::Fbm { hurst };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ProcessSpec::Fbm { hurst } if !(hurst > 0.0 && hurst < 1.0) => Err(
                Error::InvalidArgument(format!("Hurst exponent must be in (0, 1), got {hurst}")),
            ),
            ProcessSpec::Ou(p) if !(p.theta > 0.0) || !p.mu.is_finite() || !p.sigma.is_finite() => {
                Err(Error::InvalidArgument(format!("invalid OU parameters {p:?}")))
            }
            _ => Ok(()),
        }
    }

    pub fn is_gaussian(&self) -> bool {
        !matches!(self, ProcessSpec::Gbm)
    }

    /// Short label used in tables: `Bm`, `gBm`, `iBm`, `OU`, `fBm 0.2`.
    pub fn label(&self) -> String {
        match self {
            ProcessSpec::Bm => "Bm".into(),
            ProcessSpec::Gbm => "gBm".into(),
            ProcessSpec::Ibm => "iBm".into(),
            ProcessSpec::Ou(_) => "OU".into(),
            ProcessSpec::Fbm { hurst } => format!("fBm {hurst}"),
        }
    }
}

/// Exact mean `E X(t)`.
pub fn mean_fn(spec: &ProcessSpec, t: f64) -> f64 {
    match *spec {
        ProcessSpec::Bm | ProcessSpec::Ibm | ProcessSpec::Fbm { .. } => 0.0,
        ProcessSpec::Gbm => (0.5 * t).exp(),
        ProcessSpec::Ou(p) => p.mu * (1.0 - (-p.theta * t).exp()),
    }
}

/// Exact covariance `Cov(X(s), X(t))`.
pub fn cov_kernel(spec: &ProcessSpec, s: f64, t: f64) -> f64 {
    let (lo, hi) = if s <= t { (s, t) } else { (t, s) };
    match *spec {
        ProcessSpec::Bm => lo,
        ProcessSpec::Gbm => (0.5 * (s + t)).exp() * lo.exp_m1(),
        ProcessSpec::Ibm => lo * lo * (hi / 2.0 - lo / 6.0),
        ProcessSpec::Ou(p) => {
            p.sigma * p.sigma / (2.0 * p.theta)
                * ((-p.theta * (hi - lo)).exp() - (-p.theta * (hi + lo)).exp())
        }
        ProcessSpec::Fbm { hurst } => {
            let h2 = 2.0 * hurst;
            0.5 * (s.abs().powf(h2) + t.abs().powf(h2) - (t - s).abs().powf(h2))
        }
    }
}

/// Covariance matrix of a Gaussian spec on the grid (row-major, m×m).
/// For gBm this is the covariance of the underlying Brownian motion.
fn gaussian_cov_matrix(spec: &ProcessSpec, grid: &Grid) -> Vec<f64> {
    let base = if spec.is_gaussian() { *spec } else { ProcessSpec::Bm };
    let t = grid.times();
    let m = t.len();
    let mut k = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..=i {
            let v = cov_kernel(&base, t[i], t[j]);
            k[i * m + j] = v;
            k[j * m + i] = v;
        }
    }
    k
}

/// Cholesky factor of the grid covariance with diagonal jitter
/// `1e-10·max diag`, retried once at `1e-8·max diag`.
pub fn grid_cov_factor(spec: &ProcessSpec, grid: &Grid) -> Result<Vec<f64>> {
    let m = grid.len();
    let k = gaussian_cov_matrix(spec, grid);
    let max_diag = (0..m).map(|i| k[i * m + i]).fold(0.0, f64::max);
    let mut last_err = None;
    for rel in [1e-10, 1e-8] {
        let mut kj = k.clone();
        for i in 0..m {
            kj[i * m + i] += rel * max_diag;
        }
        match cholesky(&kj, m) {
            Ok(l) => return Ok(l),
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.expect("at least one attempt"))
}

/// Draws `n` independent trajectories on the grid (rows of the result).
pub fn sample_paths(spec: &ProcessSpec, grid: &Grid, n: usize, seed: u64) -> Result<DMatrix<f64>> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one path".into()));
    }
    let l = grid_cov_factor(spec, grid)?;
    Ok(sample_with_factor(spec, grid, &l, n, seed))
}

/// Same as [`sample_paths`] with a precomputed [`grid_cov_factor`].
pub fn sample_with_factor(
    spec: &ProcessSpec,
    grid: &Grid,
    factor: &[f64],
    n: usize,
    seed: u64,
) -> DMatrix<f64> {
    let m = grid.len();
    let mut rng = seeded_rng(seed);
    let mean: Vec<f64> = if spec.is_gaussian() {
        grid.times().iter().map(|&t| mean_fn(spec, t)).collect()
    } else {
        vec![0.0; m]
    };
    let mut out = DMatrix::zeros(n, m);
    let mut z = vec![0.0; m];
    for r in 0..n {
        for zi in z.iter_mut() {
            *zi = rng.sample(StandardNormal);
        }
        for i in 0..m {
            let row = &factor[i * m..i * m + i + 1];
            let x: f64 = row.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>() + mean[i];
            out[(r, i)] = if spec.is_gaussian() { x } else { x.exp() };
        }
    }
    out
}

/// Which point tuple to use for regression model 2.
///
/// The published point list and the published response equation disagree
/// on the third point (0.6 vs 0.67).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model2Variant {
    /// Points from the response equation, third point 0.67.
    #[default]
    Equation,
    /// Points from the tuple, third point 0.6.
    Tuple,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionModelSpec {
    pub model_id: u8,
    #[serde(default)]
    pub true_points: Vec<f64>,
    #[serde(default)]
    pub true_weights: Vec<f64>,
    pub noise_sigma: f64,
}

impl RegressionModelSpec {
    /// `Y = 2X(0.2) - 5X(0.4) + X(0.9) + ε`.
    pub fn model1(noise_sigma: f64) -> Self {
        Self {
            model_id: 1,
            true_points: vec![0.2, 0.4, 0.9],
            true_weights: vec![2.0, -5.0, 1.0],
            noise_sigma,
        }
    }

    pub fn model2(noise_sigma: f64, variant: Model2Variant) -> Self {
        let third = match variant {
            Model2Variant::Equation => 0.67,
            Model2Variant::Tuple => 0.6,
        };
        Self {
            model_id: 2,
            true_points: vec![0.16, 0.47, third, 0.85, 0.91],
            true_weights: vec![2.1, -0.2, -1.9, 5.0, 4.2],
            noise_sigma,
        }
    }

    /// `Y = ∫₀¹ log(1+t) X(t) dt + ε`.
    pub fn model3(noise_sigma: f64) -> Self {
        Self {
            model_id: 3,
            true_points: Vec::new(),
            true_weights: Vec::new(),
            noise_sigma,
        }
    }

    pub fn by_id(model_id: u8, noise_sigma: f64) -> Result<Self> {
        match model_id {
            1 => Ok(Self::model1(noise_sigma)),
            2 => Ok(Self::model2(noise_sigma, Model2Variant::default())),
            3 => Ok(Self::model3(noise_sigma)),
            _ => Err(Error::InvalidArgument(format!(
                "model must be 1, 2 or 3, got {model_id}"
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.noise_sigma >= 0.0) {
            return Err(Error::InvalidArgument("noise_sigma must be >= 0".into()));
        }
        match self.model_id {
            1 | 2 => {
                if self.true_points.is_empty() || self.true_points.len() != self.true_weights.len()
                {
                    return Err(Error::InvalidArgument(
                        "true_points and true_weights must be nonempty and equally long".into(),
                    ));
                }
                Ok(())
            }
            3 if self.true_points.is_empty() && self.true_weights.is_empty() => Ok(()),
            3 => Err(Error::InvalidArgument("model 3 carries no points".into())),
            id => Err(Error::InvalidArgument(format!("unknown model {id}"))),
        }
    }

    /// True impact points, when the model is sparse.
    pub fn sparse_points(&self) -> Option<&[f64]> {
        (self.model_id != 3).then_some(self.true_points.as_slice())
    }

    /// Grid weights `w` such that the noiseless response is `Σ_j w_j X(t_j)`.
    pub fn functional_weights(&self, grid: &Grid) -> Result<Vec<f64>> {
        self.validate()?;
        let mut w = vec![0.0; grid.len()];
        if self.model_id == 3 {
            // Trapezoid over the nodes 0, t_1, …, t_m; the integrand vanishes at 0.
            let t = grid.times();
            let m = t.len();
            for j in 0..m {
                let left = if j == 0 { t[0] } else { t[j] - t[j - 1] };
                let right = if j + 1 < m { t[j + 1] - t[j] } else { 0.0 };
                w[j] = 0.5 * (left + right) * t[j].ln_1p();
            }
        } else {
            for (&p, &b) in self.true_points.iter().zip(&self.true_weights) {
                let k = grid.snap(p).ok_or(Error::PointNotOnGrid(p))?;
                w[k] += b;
            }
        }
        Ok(w)
    }
}

/// `Y_i = Σ_j w_j X_i(t_j) + ε_i` with `ε_i ~ N(0, noise_sigma²)`.
pub fn gen_response(
    model: &RegressionModelSpec,
    paths: &DMatrix<f64>,
    grid: &Grid,
    seed: u64,
) -> Result<Vec<f64>> {
    if paths.ncols() != grid.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            actual: paths.ncols(),
        });
    }
    let w = model.functional_weights(grid)?;
    let mut rng = seeded_rng(seed);
    Ok((0..paths.nrows())
        .map(|i| {
            let signal: f64 = paths.row(i).iter().zip(&w).map(|(x, w)| x * w).sum();
            let eps: f64 = rng.sample(StandardNormal);
            signal + model.noise_sigma * eps
        })
        .collect())
}
