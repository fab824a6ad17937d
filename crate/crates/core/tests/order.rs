use impact_select::data::Grid;
use impact_select::estimators::PopulationMoments;
use impact_select::order::{estimate_p, qmax_series, OrderMethod, QmaxSeries};
use impact_select::processes::{cov_kernel, ProcessSpec};
use impact_select::selector::{greedy_select, SelectionConstraints};
use proptest::prelude::*;

fn increasing_series() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(1e-6f64..10.0, 2..12).prop_map(|incs| {
        let mut acc = 0.0;
        incs.into_iter()
            .map(|d| {
                acc += d;
                acc
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn estimate_lies_in_range(values in increasing_series(), rho in 1e-4f64..0.5) {
        let series = QmaxSeries::from_values(values.clone()).unwrap();
        for method in [OrderMethod::Kmeans, OrderMethod::Threshold] {
            let p = estimate_p(&series, method, rho).unwrap().p_hat;
            prop_assert!(p >= 1 && p <= values.len());
        }
    }

    #[test]
    fn estimate_is_scale_invariant(values in increasing_series(), k in 1e-3f64..1e3) {
        let a = QmaxSeries::from_values(values.clone()).unwrap();
        let b = QmaxSeries::from_values(values.iter().map(|v| v * k).collect()).unwrap();
        for method in [OrderMethod::Kmeans, OrderMethod::Threshold] {
            prop_assert_eq!(
                estimate_p(&a, method, 0.01).unwrap().p_hat,
                estimate_p(&b, method, 0.01).unwrap().p_hat
            );
        }
    }
}

#[test]
fn population_model_gives_three() {
    let grid = Grid::equispaced(100).unwrap();
    let pop = PopulationMoments::sparse_model(
        grid.times(),
        |s, t| cov_kernel(&ProcessSpec::Bm, s, t),
        &[0.2, 0.4, 0.9],
        &[2.0, -5.0, 1.0],
    )
    .unwrap();
    let path = greedy_select(&pop, &grid, &SelectionConstraints::for_grid(&grid)).unwrap();
    let series = qmax_series(&path).unwrap();
    for method in [OrderMethod::Kmeans, OrderMethod::Threshold] {
        assert_eq!(estimate_p(&series, method, 0.01).unwrap().p_hat, 3, "{method}");
    }
}
