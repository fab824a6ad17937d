#![allow(dead_code)]

use impact_select::data::{Dataset, Grid};
use impact_select::estimators::{estimate_moments, MomentEstimates, Moments};
use impact_select::processes::{gen_response, sample_paths, OuParams, ProcessSpec, RegressionModelSpec};
use impact_select::seeded_rng;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::seq::index::sample;
use rand::Rng;

/// A small random regression problem on an equispaced grid.
pub struct Instance {
    pub grid: Grid,
    pub data: Dataset,
    pub est: MomentEstimates,
}

pub fn random_instance(seed: u64, max_m: usize) -> Instance {
    let m = seeded_rng(seed ^ 0x5A5A).random_range(5..=max_m);
    random_instance_with_m(seed, m)
}

pub fn random_instance_with_m(seed: u64, m: usize) -> Instance {
    let mut rng = seeded_rng(seed ^ 0xA5A5_0000);
    let n = rng.random_range(20..=80);
    let grid = Grid::equispaced(m).unwrap();
    let process = match rng.random_range(0..4) {
        0 => ProcessSpec::Bm,
        1 => ProcessSpec::Ou(OuParams::default()),
        2 => ProcessSpec::Gbm,
        _ => ProcessSpec::Fbm {
            hurst: rng.random_range(0.2..0.8),
        },
    };
    let k = rng.random_range(1..=3.min(m));
    let idx = sample(&mut rng, m, k).into_vec();
    let model = RegressionModelSpec {
        model_id: 1,
        true_points: idx.iter().map(|&i| grid.time(i)).collect(),
        true_weights: (0..k).map(|_| rng.random_range(-3.0..3.0)).collect(),
        noise_sigma: rng.random_range(0.05..0.5),
    };
    let x = sample_paths(&process, &grid, n, rng.random()).unwrap();
    let y = gen_response(&model, &x, &grid, rng.random()).unwrap();
    let data = Dataset::new(grid.clone(), x, y).unwrap();
    let est = estimate_moments(&data).unwrap();
    Instance { grid, data, est }
}

/// `cᵀ Σ⁻¹ c` by exact rational elimination on the (exactly representable)
/// f64 moment values, rounded once at the end. Differences of two such values
/// carry no cancellation error, so this serves as an independent oracle for
/// the incremental routes.
pub fn direct_q0<M: Moments>(est: &M, idx: &[usize]) -> f64 {
    if idx.is_empty() {
        return 0.0;
    }
    exact_q0(est, idx).to_f64().expect("finite")
}

/// `Q0(T ∪ {t}) − Q0(T)` in exact arithmetic, rounded once.
pub fn direct_increment<M: Moments>(est: &M, selected: &[usize], candidate: usize) -> f64 {
    let mut all = selected.to_vec();
    all.push(candidate);
    let small = if selected.is_empty() {
        BigRational::zero()
    } else {
        exact_q0(est, selected)
    };
    (exact_q0(est, &all) - small).to_f64().expect("finite")
}

fn exact_q0<M: Moments>(est: &M, idx: &[usize]) -> BigRational {
    let r = |v: f64| BigRational::from_float(v).expect("finite moment");
    let p = idx.len();
    let mut a: Vec<Vec<BigRational>> = (0..p)
        .map(|i| {
            let mut row: Vec<BigRational> = idx.iter().map(|&j| r(est.cov(idx[i], j))).collect();
            row.push(r(est.cross_cov(idx[i])));
            row
        })
        .collect();
    let c: Vec<BigRational> = idx.iter().map(|&i| r(est.cross_cov(i))).collect();
    for col in 0..p {
        let pivot = (col..p).find(|&i| !a[i][col].is_zero()).expect("nonsingular");
        a.swap(col, pivot);
        for i in col + 1..p {
            let f = &a[i][col] / &a[col][col];
            for k in col..=p {
                let delta = &f * &a[col][k];
                a[i][k] -= delta;
            }
        }
    }
    let mut x = vec![BigRational::zero(); p];
    for i in (0..p).rev() {
        let mut acc = a[i][p].clone();
        for k in i + 1..p {
            acc -= &a[i][k] * &x[k];
        }
        x[i] = acc / &a[i][i];
    }
    c.iter().zip(&x).fold(BigRational::zero(), |acc, (ci, xi)| acc + ci * xi)
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
