//! Impact-point selection by maximizing `Q0(T) = c_Tᵀ Σ_T⁻¹ c_T`.
//!
//! The greedy search adds one grid point per step, choosing the admissible
//! candidate with the largest gain
//!
//! ```text
//! Q0(T ∪ {t}) − Q0(T) = (c_Tᵀ Σ_T⁻¹ c_{T,t} − c_t)² / (σ_t² − c_{T,t}ᵀ Σ_T⁻¹ c_{T,t})
//! ```
//!
//! evaluated against a Cholesky factor of `Σ_T` that grows by one row per
//! accepted point. The same gain written as a squared semi-partial
//! covariance over a residual variance is kept as an independent route.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::Grid;
use crate::error::{Error, Result};
use crate::estimators::{submatrix, MomentEstimates, Moments};
use crate::linalg::{cholesky, forward_substitute, GrowingCholesky};

/// Relative factor for the default increment-denominator tolerance.
pub const DEFAULT_RELATIVE_DENOM_TOL: f64 = 1e-10;

/// Largest number of subsets [`exhaustive_select`] enumerates by default.
pub const DEFAULT_ENUMERATION_CAP: u128 = 5_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionConstraints {
    /// Minimum time separation between selected points.
    pub delta: f64,
    pub max_p: usize,
    /// Absolute tolerance on the gain denominator. `None` means
    /// `1e-10 × max_t σ̂²(t)`.
    #[serde(default)]
    pub denom_tol: Option<f64>,
}

impl SelectionConstraints {
    /// One grid step of separation, at most 10 points.
    pub fn for_grid(grid: &Grid) -> Self {
        Self {
            delta: grid.step(),
            max_p: 10,
            denom_tol: None,
        }
    }

    pub fn with_max_p(mut self, max_p: usize) -> Self {
        self.max_p = max_p;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_p < 1 {
            return Err(Error::InvalidArgument("max_p must be >= 1".into()));
        }
        if !(self.delta >= 0.0) {
            return Err(Error::InvalidArgument("delta must be >= 0".into()));
        }
        if let Some(tol) = self.denom_tol {
            if !(tol > 0.0) {
                return Err(Error::InvalidArgument("denom_tol must be > 0".into()));
            }
        }
        Ok(())
    }

    /// The absolute denominator tolerance for these moments.
    pub fn resolve_denom_tol<M: Moments + ?Sized>(&self, est: &M) -> f64 {
        match self.denom_tol {
            Some(t) => t,
            None => {
                let scale = est.max_variance();
                if scale > 0.0 {
                    DEFAULT_RELATIVE_DENOM_TOL * scale
                } else {
                    f64::MIN_POSITIVE
                }
            }
        }
    }
}

/// `cᵀ Σ⁻¹ c` via a Cholesky factor and one triangular solve.
///
/// `sigma` is row-major p×p.
pub fn q0(sigma: &[f64], c: &[f64]) -> Result<f64> {
    let p = c.len();
    if sigma.len() != p * p {
        return Err(Error::DimensionMismatch {
            expected: p * p,
            actual: sigma.len(),
        });
    }
    if p == 0 {
        return Ok(0.0);
    }
    let l = cholesky(sigma, p)?;
    let mut w = c.to_vec();
    forward_substitute(&l, p, &mut w);
    Ok(w.iter().map(|x| x * x).sum())
}

/// Factorization of `Σ̂_T` over the selected points plus `L⁻¹ ĉ_T`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SolverState {
    selected: Vec<usize>,
    factor: GrowingCholesky,
    /// `L⁻¹ ĉ_T`; its squared norm is `Q̂(T)`.
    whitened: Vec<f64>,
    /// Covariance of each selected point with every grid point.
    columns: Vec<Vec<f64>>,
    denom_tol: f64,
    q: f64,
}

/// Pieces of the gain for one candidate.
#[derive(Debug, Clone, Copy)]
struct Gain {
    numerator: f64,
    denominator: f64,
}

impl SolverState {
    pub fn new(denom_tol: f64) -> Self {
        Self {
            denom_tol,
            ..Self::default()
        }
    }

    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    /// `Q̂` at the current selection.
    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn denom_tol(&self) -> f64 {
        self.denom_tol
    }

    /// `Σ̂_T⁻¹ ĉ_T` in selection order.
    pub fn coefficients(&self) -> Vec<f64> {
        self.factor.backward(&self.whitened)
    }

    fn terms<M: Moments + ?Sized>(&self, est: &M, candidate: usize) -> (Vec<f64>, Gain) {
        let v: Vec<f64> = self.columns.iter().map(|col| col[candidate]).collect();
        let z = self.factor.forward(&v);
        let proj: f64 = self.whitened.iter().zip(&z).map(|(a, b)| a * b).sum();
        let explained: f64 = z.iter().map(|x| x * x).sum();
        let resid_cov = est.cross_cov(candidate) - proj;
        (
            z,
            Gain {
                numerator: resid_cov,
                denominator: est.variance(candidate) - explained,
            },
        )
    }

    /// Adds `candidate` to the selection, returning the gain in `Q̂`.
    pub fn accept<M: Moments + ?Sized>(&mut self, est: &M, candidate: usize) -> Result<f64> {
        check_candidate(est, candidate)?;
        let (z, gain) = self.terms(est, candidate);
        if self.selected.contains(&candidate) || !(gain.denominator > self.denom_tol) {
            return Err(Error::Redundant {
                index: candidate,
                denominator: gain.denominator,
            });
        }
        let root = gain.denominator.sqrt();
        self.factor.push(z, gain.denominator)?;
        self.whitened.push(gain.numerator / root);
        self.columns.push(est.cov_column(candidate));
        self.selected.push(candidate);
        let inc = gain.numerator * gain.numerator / gain.denominator;
        self.q += inc;
        Ok(inc)
    }
}

fn check_candidate<M: Moments + ?Sized>(est: &M, candidate: usize) -> Result<()> {
    if candidate >= est.len() {
        return Err(Error::InvalidArgument(format!(
            "candidate {candidate} out of range for grid of {}",
            est.len()
        )));
    }
    Ok(())
}

/// Gain in `Q̂` from adding `candidate` to the state's selection, using the
/// cached factorization.
pub fn q0_increment<M: Moments + ?Sized>(
    state: &SolverState,
    est: &M,
    candidate: usize,
) -> Result<f64> {
    check_candidate(est, candidate)?;
    let (_, gain) = state.terms(est, candidate);
    if state.selected.contains(&candidate) || !(gain.denominator > state.denom_tol) {
        return Err(Error::Redundant {
            index: candidate,
            denominator: gain.denominator,
        });
    }
    Ok(gain.numerator * gain.numerator / gain.denominator)
}

/// Sample residual quantities behind the semi-partial form of the gain.
#[derive(Debug, Clone, Copy)]
pub struct SemipartialTerms {
    /// `ĉov(Y − Ŷ_T, X(t))`.
    pub cov_residual_response: f64,
    /// `ĉov(Y − Ŷ_T, X(t) − X̂_T(t))`.
    pub cov_residual_both: f64,
    /// `v̂ar(X(t) − X̂_T(t))`.
    pub residual_variance: f64,
}

/// Projects the centered response and candidate column onto the span of the
/// selected centered columns and returns the residual moments.
pub fn semipartial_terms(
    selected: &[usize],
    est: &MomentEstimates,
    candidate: usize,
) -> Result<SemipartialTerms> {
    check_candidate(est, candidate)?;
    let n = est.n();
    let nf = n as f64;
    let y = DVector::from_column_slice(est.centered_response());
    let xt = DVector::from_column_slice(est.centered_column(candidate));
    let p = selected.len();
    let (resid_y, resid_x) = if p == 0 {
        (y.clone(), xt.clone())
    } else {
        let cols: Vec<f64> = selected
            .iter()
            .flat_map(|&k| est.centered_column(k).iter().copied())
            .collect();
        let design = DMatrix::from_column_slice(n, p, &cols);
        let gram = design.transpose() * &design / nf;
        let chol = gram
            .cholesky()
            .ok_or(Error::NotPositiveDefinite { minor: p })?;
        let beta = chol.solve(&(design.transpose() * &y / nf));
        let gamma = chol.solve(&(design.transpose() * &xt / nf));
        (&y - &design * beta, &xt - &design * gamma)
    };
    Ok(SemipartialTerms {
        cov_residual_response: resid_y.dot(&xt) / nf,
        cov_residual_both: resid_y.dot(&resid_x) / nf,
        residual_variance: resid_x.norm_squared() / nf,
    })
}

/// Gain computed as `ĉov²(Y − Ŷ_T, X(t)) / v̂ar(X(t) − X̂_T(t))` from sample
/// residuals. Same contract as [`q0_increment`].
pub fn q0_increment_semipartial(
    state: &SolverState,
    est: &MomentEstimates,
    candidate: usize,
) -> Result<f64> {
    let terms = semipartial_terms(&state.selected, est, candidate)?;
    if state.selected.contains(&candidate) || !(terms.residual_variance > state.denom_tol) {
        return Err(Error::Redundant {
            index: candidate,
            denominator: terms.residual_variance,
        });
    }
    Ok(terms.cov_residual_response.powi(2) / terms.residual_variance)
}

fn separated(t: f64, others: impl IntoIterator<Item = f64>, delta: f64) -> bool {
    // Tolerance absorbs rounding in differences of grid times.
    others
        .into_iter()
        .all(|s| (t - s).abs() + 1e-12 >= delta)
}

/// Grid indices that are not selected and lie at least `delta` from every
/// selected time.
pub fn admissible_candidates(grid: &Grid, selected: &[usize], delta: f64) -> Vec<usize> {
    let times = grid.times();
    (0..grid.len())
        .filter(|k| !selected.contains(k))
        .filter(|&k| separated(times[k], selected.iter().map(|&s| times[s]), delta))
        .collect()
}

/// Nested selections produced by the greedy search.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionPath {
    /// Selected grid indices, in selection order.
    pub selected: Vec<usize>,
    /// `Q̂` after each step.
    pub qmax_after: Vec<f64>,
    /// `Σ̂_T⁻¹ ĉ_T` after each step.
    pub coeffs_at_each_step: Vec<Vec<f64>>,
    pub state: SolverState,
}

impl SelectionPath {
    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }

    pub fn selected_times(&self, grid: &Grid) -> Vec<f64> {
        self.selected.iter().map(|&k| grid.time(k)).collect()
    }
}

/// Greedy forward selection. Each step takes the admissible candidate with
/// the largest gain (ties to the smallest index) and stops at `max_p` or
/// when every admissible candidate is redundant.
pub fn greedy_select<M: Moments + ?Sized>(
    est: &M,
    grid: &Grid,
    constraints: &SelectionConstraints,
) -> Result<SelectionPath> {
    constraints.validate()?;
    if est.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            actual: est.len(),
        });
    }
    let mut state = SolverState::new(constraints.resolve_denom_tol(est));
    let mut qmax_after = Vec::new();
    let mut coeffs = Vec::new();
    while state.selected.len() < constraints.max_p {
        let mut best: Option<(usize, f64)> = None;
        for k in admissible_candidates(grid, &state.selected, constraints.delta) {
            let Ok(gain) = q0_increment(&state, est, k) else {
                continue;
            };
            if best.is_none_or(|(_, g)| gain > g) {
                best = Some((k, gain));
            }
        }
        let Some((k, _)) = best else { break };
        state.accept(est, k)?;
        qmax_after.push(state.q);
        coeffs.push(state.coefficients());
    }
    Ok(SelectionPath {
        selected: state.selected.clone(),
        qmax_after,
        coeffs_at_each_step: coeffs,
        state,
    })
}

fn binomial(m: usize, p: usize) -> u128 {
    if p > m {
        return 0;
    }
    let p = p.min(m - p);
    (0..p).fold(1u128, |acc, i| acc * (m - i) as u128 / (i + 1) as u128)
}

/// Best admissible `p`-subset by enumeration, lexicographically first among
/// ties. Subsets whose covariance does not factor are skipped.
pub fn exhaustive_select<M: Moments + ?Sized>(
    est: &M,
    grid: &Grid,
    p: usize,
    constraints: &SelectionConstraints,
    cap: u128,
) -> Result<(Vec<usize>, f64)> {
    let m = grid.len();
    if est.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: est.len(),
        });
    }
    let needed = binomial(m, p);
    if needed > cap {
        return Err(Error::EnumerationCap { needed, cap });
    }
    if p == 0 {
        return Ok((Vec::new(), 0.0));
    }
    if p > m {
        return Err(Error::InvalidArgument(format!("p = {p} exceeds grid size {m}")));
    }
    let times = grid.times();
    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut idx: Vec<usize> = (0..p).collect();
    loop {
        let ok = (1..p).all(|a| separated(times[idx[a]], idx[..a].iter().map(|&s| times[s]), constraints.delta));
        if ok {
            let (sigma, c) = submatrix(est, &idx)?;
            if let Ok(q) = q0(&sigma, &c) {
                if best.as_ref().is_none_or(|(_, bq)| q > *bq) {
                    best = Some((idx.clone(), q));
                }
            }
        }
        // next combination in lexicographic order
        let mut i = p;
        while i > 0 && idx[i - 1] == m - p + i - 1 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        idx[i - 1] += 1;
        for j in i..p {
            idx[j] = idx[j - 1] + 1;
        }
    }
    best.ok_or_else(|| Error::InvalidArgument(format!("no admissible subset of size {p}")))
}
