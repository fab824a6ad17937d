use impact_select::data::Grid;
use impact_select::processes::{
    cov_kernel, gen_response, mean_fn, sample_paths, OuParams, ProcessSpec, RegressionModelSpec,
};
use proptest::prelude::*;

fn all_kinds() -> Vec<ProcessSpec> {
    vec![
        ProcessSpec::Bm,
        ProcessSpec::Gbm,
        ProcessSpec::Ibm,
        ProcessSpec::Ou(OuParams::default()),
        ProcessSpec::Fbm { hurst: 0.2 },
        ProcessSpec::Fbm { hurst: 0.8 },
    ]
}

#[test]
fn sample_means_match_mean_function() {
    let grid = Grid::equispaced(20).unwrap();
    let n = 5000;
    for spec in all_kinds() {
        let x = sample_paths(&spec, &grid, n, 31).unwrap();
        for k in [0, 7, 19] {
            let t = grid.time(k);
            let col = x.column(k);
            let mean = col.sum() / n as f64;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            let se = (var / n as f64).sqrt();
            assert!((mean - mean_fn(&spec, t)).abs() <= 4.0 * se, "{} at {t}", spec.label());
        }
    }
}

proptest! {
    #[test]
    fn kernels_are_symmetric(s in 0.0f64..1.0, t in 0.0f64..1.0, h in 0.05f64..0.95) {
        let mut kinds = all_kinds();
        kinds.push(ProcessSpec::Fbm { hurst: h });
        for spec in kinds {
            let a = cov_kernel(&spec, s, t);
            let b = cov_kernel(&spec, t, s);
            prop_assert!((a - b).abs() <= 1e-14 * a.abs().max(1e-300), "{}", spec.label());
        }
    }

    #[test]
    fn noiseless_response_is_linear(model_id in 1u8..=3, seed in any::<u64>()) {
        let grid = Grid::equispaced(50).unwrap();
        let model = RegressionModelSpec::by_id(model_id, 0.0).unwrap();
        let x = sample_paths(&ProcessSpec::Bm, &grid, 5, seed).unwrap();
        let y = gen_response(&model, &x, &grid, 0).unwrap();
        let y2 = gen_response(&model, &(&x * 2.0), &grid, 0).unwrap();
        for (a, b) in y.iter().zip(&y2) {
            prop_assert!((2.0 * a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }
}
