mod common;

use common::median;
use impact_select::bench::fit_selection;
use impact_select::data::{split, Dataset, Grid};
use impact_select::estimators::estimate_moments;
use impact_select::order::OrderMethod;
use impact_select::processes::{gen_response, sample_paths, ProcessSpec, RegressionModelSpec};
use impact_select::regressor::{fit, rmse};
use impact_select::selector::SelectionConstraints;
use nalgebra::DMatrix;
use proptest::prelude::*;

#[test]
fn noiseless_model_recovers_coefficients() {
    let grid = Grid::equispaced(100).unwrap();
    let x = sample_paths(&ProcessSpec::Bm, &grid, 200, 11).unwrap();
    let y = gen_response(&RegressionModelSpec::model1(0.0), &x, &grid, 12).unwrap();
    let est = estimate_moments(&Dataset::new(grid.clone(), x, y).unwrap()).unwrap();
    let pred = fit(&est, &grid, &[19, 39, 89]).unwrap();
    for (b, want) in pred.coefficients.iter().zip([2.0, -5.0, 1.0]) {
        assert!((b - want).abs() < 1e-6, "{b} vs {want}");
    }
    assert!(pred.intercept.abs() < 1e-6);
}

#[test]
fn prediction_is_affine_in_paths() {
    let grid = Grid::equispaced(30).unwrap();
    let x = sample_paths(&ProcessSpec::Bm, &grid, 50, 1).unwrap();
    let y = gen_response(&RegressionModelSpec::model1(0.2), &x, &grid, 2).unwrap();
    let est = estimate_moments(&Dataset::new(grid.clone(), x, y).unwrap()).unwrap();
    let pred = fit(&est, &grid, &[5, 11, 26]).unwrap();
    let a = sample_paths(&ProcessSpec::Bm, &grid, 7, 3).unwrap();
    let b = sample_paths(&ProcessSpec::Bm, &grid, 7, 4).unwrap();
    let combo: DMatrix<f64> = &a * 2.0 - &b * 0.5;
    let pa = pred.predict(&grid, &a).unwrap();
    let pb = pred.predict(&grid, &b).unwrap();
    let pc = pred.predict(&grid, &combo).unwrap();
    for i in 0..7 {
        // intercept enters with weight 2 − 0.5 on the left
        let expect = 2.0 * pa[i] - 0.5 * pb[i] - 0.5 * pred.intercept;
        assert!((pc[i] - expect).abs() < 1e-10 * (1.0 + expect.abs()));
    }
}

proptest! {
    #[test]
    fn relative_error_is_scale_invariant(
        pairs in prop::collection::vec((-5.0f64..5.0, 0.5f64..5.0), 1..30),
        k in 1e-3f64..1e3,
    ) {
        let (p, a): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let r1 = rmse(&p, &a).unwrap();
        let ps: Vec<f64> = p.iter().map(|v| v * k).collect();
        let as_: Vec<f64> = a.iter().map(|v| v * k).collect();
        let r2 = rmse(&ps, &as_).unwrap();
        prop_assert!((r1 - r2).abs() <= 1e-10 * r1.max(1e-12));
    }
}

#[test]
fn excess_error_shrinks_with_sample_size() {
    // Mean squared distance between fitted and oracle predictions on fresh
    // paths, median over replications.
    let grid = Grid::equispaced(100).unwrap();
    let model = RegressionModelSpec::model1(0.2);
    let cons = SelectionConstraints::for_grid(&grid);
    let truth = [19usize, 39, 89];
    let mut medians = Vec::new();
    for n in [100usize, 400, 1600] {
        let errs: Vec<f64> = (0..20u64)
            .map(|rep| {
                let x = sample_paths(&ProcessSpec::Bm, &grid, n + 200, 1000 + rep).unwrap();
                let y = gen_response(&model, &x, &grid, 2000 + rep).unwrap();
                let parts = split(&Dataset::new(grid.clone(), x, y).unwrap(), n, rep).unwrap();
                let est = estimate_moments(&parts.train).unwrap();
                let sel = fit_selection(&est, &grid, &cons, OrderMethod::Kmeans, 0.01).unwrap();
                let test = parts.test.trajectories();
                let fitted = sel.predictor.predict(&grid, test).unwrap();
                (0..test.nrows())
                    .map(|i| {
                        let oracle: f64 = truth.iter().zip(&model.true_weights).map(|(&k, w)| w * test[(i, k)]).sum();
                        (fitted[i] - oracle).powi(2)
                    })
                    .sum::<f64>()
                    / test.nrows() as f64
            })
            .collect();
        medians.push(median(errs));
    }
    assert!(medians.windows(2).all(|w| w[1] <= w[0]), "{medians:?}");
}
