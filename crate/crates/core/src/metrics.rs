//! Selection accuracy against known impact points.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hausdorff distance between two finite sets of times.
pub fn hausdorff(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(directed(a, b).max(directed(b, a)))
}

/// `max_{x∈a} min_{y∈b} |x − y|`.
fn directed(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .map(|x| b.iter().map(|y| (x - y).abs()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionScore {
    pub hausdorff: f64,
    pub p_hat: usize,
    pub p_star: usize,
    pub selected_times: Vec<f64>,
    pub true_times: Vec<f64>,
}

pub fn score_selection(selected: &[f64], truth: &[f64]) -> Result<SelectionScore> {
    Ok(SelectionScore {
        hausdorff: hausdorff(selected, truth)?,
        p_hat: selected.len(),
        p_star: truth.len(),
        selected_times: selected.to_vec(),
        true_times: truth.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basics() {
        assert_eq!(hausdorff(&[0.2, 0.5], &[0.5, 0.2]).unwrap(), 0.0);
        assert!((hausdorff(&[0.2], &[0.2, 0.9]).unwrap() - 0.7).abs() < 1e-15);
        assert!(matches!(hausdorff(&[], &[0.1]), Err(Error::EmptySet)));
    }

    #[test]
    fn extra_point_sets_distance() {
        let truth = [0.2, 0.4, 0.9];
        let s = score_selection(&[0.2, 0.4, 0.9, 0.65], &truth).unwrap();
        assert!((s.hausdorff - 0.25).abs() < 1e-15);
        assert_eq!((s.p_hat, s.p_star), (4, 3));
        let same = score_selection(&truth, &truth).unwrap();
        assert_eq!(same.hausdorff, 0.0);
        assert_eq!(same.p_hat, same.p_star);
        assert!(score_selection(&[], &truth).is_err());
    }
}
