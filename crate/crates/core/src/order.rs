//! Estimating the number of impact points from the `Q̂max(p)` series.
//!
//! Beyond the true number of points the series flattens out, so the gaps
//! `Q̂max(p+1) − Q̂max(p)` collapse. Two rules locate the elbow: 2-means on
//! the log gaps, and a threshold relative to `Q̂max(1)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::selector::SelectionPath;

/// Gaps are floored at this fraction of `Q̂max(P)` before taking logs.
pub const GAP_FLOOR_RELATIVE: f64 = 1e-15;

const KMEANS_MAX_ITER: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderMethod {
    #[default]
    Kmeans,
    Threshold,
}

impl std::fmt::Display for OrderMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OrderMethod::Kmeans => f.write_str("kmeans"),
            OrderMethod::Threshold => f.write_str("threshold"),
        }
    }
}

impl std::str::FromStr for OrderMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kmeans" => Ok(OrderMethod::Kmeans),
            "threshold" => Ok(OrderMethod::Threshold),
            _ => Err(Error::InvalidArgument(format!("unknown order method {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QmaxSeries {
    /// `Q̂max(1), …, Q̂max(P)`.
    pub values: Vec<f64>,
    /// `L(p) = log(max(gap_p, floor))` for `p = 1..P-1`.
    pub log_gaps: Vec<f64>,
}

impl QmaxSeries {
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("empty Qmax series".into()));
        }
        let last = values[values.len() - 1];
        let floor = (GAP_FLOOR_RELATIVE * last.abs()).max(f64::MIN_POSITIVE);
        let log_gaps = values
            .windows(2)
            .map(|w| (w[1] - w[0]).max(floor).ln())
            .collect();
        Ok(Self { values, log_gaps })
    }

    /// Path length `P`.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn qmax_series(path: &SelectionPath) -> Result<QmaxSeries> {
    QmaxSeries::from_values(path.qmax_after.clone())
}

/// Estimate of `p*` plus a note when a fallback rule fired.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderEstimate {
    pub p_hat: usize,
    pub note: Option<String>,
}

/// Two-cluster Lloyd iteration in one dimension, seeded at the extremes.
/// Returns `true` for members of the cluster with the larger center, or
/// `None` if the data has no spread.
fn two_means(values: &[f64]) -> Option<Vec<bool>> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return None;
    }
    let (mut c_lo, mut c_hi) = (lo, hi);
    let mut upper: Vec<bool> = Vec::new();
    for _ in 0..KMEANS_MAX_ITER {
        let next: Vec<bool> = values
            .iter()
            .map(|&v| (v - c_hi).abs() < (v - c_lo).abs())
            .collect();
        if next == upper {
            break;
        }
        upper = next;
        let mean_of = |flag: bool| {
            let (s, k) = values
                .iter()
                .zip(&upper)
                .filter(|(_, &u)| u == flag)
                .fold((0.0, 0usize), |(s, k), (v, _)| (s + v, k + 1));
            (k > 0).then(|| s / k as f64)
        };
        if let Some(c) = mean_of(false) {
            c_lo = c;
        }
        if let Some(c) = mean_of(true) {
            c_hi = c;
        }
    }
    Some(upper)
}

/// Smallest `p` such that every `L(q)`, `q >= p`, lies in the cluster not
/// containing `L(1)`.
///
/// Falls back to `P` when clustering is impossible (fewer than two gaps or
/// no spread) or when `L(P-1)` shares the cluster of `L(1)`. When `L(1)` is
/// itself in the small-gap cluster the first gap is already negligible and
/// the estimate is 1.
pub fn estimate_p_kmeans(series: &QmaxSeries) -> OrderEstimate {
    let p_full = series.len();
    let gaps = &series.log_gaps;
    if gaps.len() < 2 {
        return OrderEstimate {
            p_hat: p_full,
            note: Some(format!("{} log gap(s), too few to cluster", gaps.len())),
        };
    }
    let Some(upper) = two_means(gaps) else {
        return OrderEstimate {
            p_hat: p_full,
            note: Some("log gaps all equal; clustering degenerate".into()),
        };
    };
    if !upper[0] {
        return OrderEstimate {
            p_hat: 1,
            note: Some("first log gap falls in the small-gap cluster".into()),
        };
    }
    // gaps[q - 1] holds L(q)
    let tail = upper.iter().rev().take_while(|&&u| !u).count();
    if tail == 0 {
        return OrderEstimate {
            p_hat: p_full,
            note: None,
        };
    }
    OrderEstimate {
        p_hat: gaps.len() - tail + 1,
        note: None,
    }
}

/// `p̂ = min{p : Q̂max(p+1) − Q̂max(p) < ρ·Q̂max(1)}`, or `P` if no gap
/// qualifies.
pub fn estimate_p_threshold(series: &QmaxSeries, rho: f64) -> Result<usize> {
    if !(rho > 0.0) {
        return Err(Error::InvalidArgument(format!("rho must be > 0, got {rho}")));
    }
    let eps = rho * series.values[0];
    Ok(series
        .values
        .windows(2)
        .position(|w| w[1] - w[0] < eps)
        .map_or(series.len(), |i| i + 1))
}

pub fn estimate_p(series: &QmaxSeries, method: OrderMethod, rho: f64) -> Result<OrderEstimate> {
    match method {
        OrderMethod::Kmeans => Ok(estimate_p_kmeans(series)),
        OrderMethod::Threshold => Ok(OrderEstimate {
            p_hat: estimate_p_threshold(series, rho)?,
            note: None,
        }),
    }
}
