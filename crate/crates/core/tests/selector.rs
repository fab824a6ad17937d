mod common;

use common::{direct_increment, direct_q0, random_instance, rel_diff};
use impact_select::data::Grid;
use impact_select::estimators::{Moments, PopulationMoments};
use impact_select::processes::{cov_kernel, ProcessSpec};
use impact_select::selector::{
    admissible_candidates, exhaustive_select, greedy_select, q0_increment, q0_increment_semipartial,
    semipartial_terms, SelectionConstraints, SolverState, DEFAULT_ENUMERATION_CAP,
};
use impact_select::{seeded_rng, Error};
use rand::seq::index::sample;
use rand::Rng;

fn state_for<M: Moments>(est: &M, selected: &[usize]) -> SolverState {
    let mut state = SolverState::new(1e-12);
    for &k in selected {
        state.accept(est, k).unwrap();
    }
    state
}

#[test]
fn recursive_gain_matches_direct_difference() {
    for seed in 0..100 {
        let inst = random_instance(seed, 30);
        let mut rng = seeded_rng(seed);
        let m = inst.grid.len();
        let p = rng.random_range(0..=4.min(m - 1));
        let idx = sample(&mut rng, m, p + 1).into_vec();
        let (sel, cand) = (&idx[..p], idx[p]);
        let state = state_for(&inst.est, sel);
        let rec = q0_increment(&state, &inst.est, cand).unwrap();
        let direct = direct_increment(&inst.est, sel, cand);
        assert!(rel_diff(rec, direct) < 1e-8, "seed {seed}: {rec} vs {direct}");
        assert!((state.q() - direct_q0(&inst.est, sel)).abs() <= 1e-10 * state.q().max(1e-300));
    }
}

#[test]
fn semipartial_form_matches_recursive_gain() {
    for seed in 100..200 {
        let inst = random_instance(seed, 30);
        let mut rng = seeded_rng(seed);
        let m = inst.grid.len();
        let p = rng.random_range(0..=4.min(m - 1));
        let idx = sample(&mut rng, m, p + 1).into_vec();
        let state = state_for(&inst.est, &idx[..p]);
        let rec = q0_increment(&state, &inst.est, idx[p]).unwrap();
        let semi = q0_increment_semipartial(&state, &inst.est, idx[p]).unwrap();
        assert!(rel_diff(rec, semi) < 1e-8, "seed {seed}: {rec} vs {semi}");
    }
}

#[test]
fn residual_response_is_orthogonal_to_selected_residual_part() {
    // ĉov(Y − Ŷ_T, X(t)) equals ĉov(Y − Ŷ_T, X(t) − X̂_T(t)).
    for seed in 200..300 {
        let inst = random_instance(seed, 30);
        let mut rng = seeded_rng(seed);
        let m = inst.grid.len();
        let p = rng.random_range(1..=4.min(m - 1));
        let idx = sample(&mut rng, m, p + 1).into_vec();
        let t = semipartial_terms(&idx[..p], &inst.est, idx[p]).unwrap();
        let scale = (inst.est.variance(idx[p]) * inst.est.cross_cov(idx[p]).abs()).sqrt().max(1e-300);
        let scale = scale.max(t.cov_residual_response.abs());
        assert!((t.cov_residual_response - t.cov_residual_both).abs() <= 1e-9 * scale);
    }
}

#[test]
fn gain_is_nonnegative_and_q_is_monotone() {
    for seed in 300..350 {
        let inst = random_instance(seed, 25);
        let cons = SelectionConstraints::for_grid(&inst.grid).with_max_p(6);
        let path = greedy_select(&inst.est, &inst.grid, &cons).unwrap();
        let mut prev = 0.0;
        for &q in &path.qmax_after {
            assert!(q >= prev - 1e-12 * q.abs());
            prev = q;
        }
    }
}

#[test]
fn greedy_respects_separation() {
    for seed in 350..380 {
        let inst = random_instance(seed, 30);
        let mut cons = SelectionConstraints::for_grid(&inst.grid).with_max_p(5);
        cons.delta = 3.0 * inst.grid.step();
        let path = greedy_select(&inst.est, &inst.grid, &cons).unwrap();
        let times = path.selected_times(&inst.grid);
        for a in 0..times.len() {
            for b in 0..a {
                assert!((times[a] - times[b]).abs() + 1e-12 >= cons.delta);
            }
        }
    }
}

#[test]
fn admissible_set_excludes_selected_and_neighbours() {
    let grid = Grid::equispaced(10).unwrap();
    let adm = admissible_candidates(&grid, &[4], 0.2);
    assert!(!adm.contains(&4) && !adm.contains(&3) && !adm.contains(&5));
    assert!(adm.contains(&2) && adm.contains(&6));
    assert_eq!(admissible_candidates(&grid, &[], 0.1).len(), 10);
}

#[test]
fn exhaustive_dominates_greedy() {
    for seed in 400..440 {
        let inst = common::random_instance_with_m(seed, 12);
        let grid = inst.grid.clone();
        let cons = SelectionConstraints::for_grid(&grid).with_max_p(2);
        let path = greedy_select(&inst.est, &grid, &cons).unwrap();
        let (_, best2) = exhaustive_select(&inst.est, &grid, 2, &cons, DEFAULT_ENUMERATION_CAP).unwrap();
        let (set1, best1) = exhaustive_select(&inst.est, &grid, 1, &cons, DEFAULT_ENUMERATION_CAP).unwrap();
        assert!(best2 >= path.qmax_after[1] - 1e-12 * best2);
        assert_eq!(set1[0], path.selected[0]);
        assert!(rel_diff(best1, path.qmax_after[0]) < 1e-12);
    }
}

#[test]
fn q_scales_quadratically_with_response() {
    for seed in 440..460 {
        let inst = random_instance(seed, 20);
        let lambda = 3.7;
        let y: Vec<f64> = inst.data.responses().iter().map(|v| lambda * v).collect();
        let scaled = impact_select::data::Dataset::new(inst.grid.clone(), inst.data.trajectories().clone(), y).unwrap();
        let est2 = impact_select::estimators::estimate_moments(&scaled).unwrap();
        let idx: Vec<usize> = (0..3.min(inst.grid.len())).map(|k| k * 2).collect();
        let q1 = direct_q0(&inst.est, &idx);
        let q2 = state_for(&est2, &idx).q();
        assert!(rel_diff(q2, lambda * lambda * q1) < 1e-9);
    }
}

fn bm_model1() -> (Grid, PopulationMoments) {
    let grid = Grid::equispaced(100).unwrap();
    let pop = PopulationMoments::sparse_model(
        grid.times(),
        |s, t| cov_kernel(&ProcessSpec::Bm, s, t),
        &[0.2, 0.4, 0.9],
        &[2.0, -5.0, 1.0],
    )
    .unwrap();
    (grid, pop)
}

#[test]
fn residual_identities_at_true_points() {
    // With the true points selected, the explained variance equals var(β'X(T*))
    // and no further point adds anything.
    let (grid, pop) = bm_model1();
    let truth = [19, 39, 89];
    let state = state_for(&pop, &truth);
    let w = [2.0, -5.0, 1.0];
    let mut var_signal = 0.0;
    for a in 0..3 {
        for b in 0..3 {
            var_signal += w[a] * w[b] * pop.cov(truth[a], truth[b]);
        }
    }
    assert!((state.q() - var_signal).abs() < 1e-10);
    for k in admissible_candidates(&grid, &truth, grid.step()) {
        let gain = q0_increment(&state, &pop, k).unwrap();
        assert!(gain.abs() < 1e-10, "index {k}: gain {gain}");
    }
}

#[test]
fn population_exhaustive_recovers_truth() {
    let (grid, pop) = bm_model1();
    let cons = SelectionConstraints::for_grid(&grid);
    let (set, q) = exhaustive_select(&pop, &grid, 3, &cons, DEFAULT_ENUMERATION_CAP).unwrap();
    assert_eq!(set, vec![19, 39, 89]);
    assert!((q - 4.5).abs() < 1e-8);
}

#[test]
fn enumeration_cap_is_enforced() {
    let (grid, pop) = bm_model1();
    let cons = SelectionConstraints::for_grid(&grid);
    let err = exhaustive_select(&pop, &grid, 5, &cons, DEFAULT_ENUMERATION_CAP).unwrap_err();
    assert!(matches!(err, Error::EnumerationCap { .. }));
}

#[test]
fn duplicate_candidate_is_redundant() {
    let (_, pop) = bm_model1();
    let state = state_for(&pop, &[19]);
    assert!(matches!(q0_increment(&state, &pop, 19), Err(Error::Redundant { .. })));
}
