mod common;

use common::{lp_saddle_instance, random_set, rng, simplex_pair, uniform_vec, unit_box};
use nalgebra::{dvector, DMatrix};
use vifw::operators::Operator;
use vifw::oracle::{self, ExtragradientOptions, OracleMethod};
use vifw::sets::TieRule;
use vifw::solver;

#[test]
fn box_solution_is_the_clamped_target() {
    let mut r = rng(4);
    for _ in 0..10 {
        let b = uniform_vec(&mut r, 4, 2.0);
        let op = Operator::affine(DMatrix::identity(4, 4), -&b, 1.0).unwrap();
        let res = oracle::solve_reference(&unit_box(4), &op, 1e-10).unwrap();
        let expected = b.map(|v| v.clamp(0.0, 1.0));
        // the gap bounds the distance: |x - x*|^2 <= V(x) / mu
        assert!((&res.x_star - expected).norm() <= 1e-5);
        assert!(res.residual <= 1e-10);
    }
}

#[test]
fn residual_meets_tolerance_on_strongly_monotone_instances() {
    for (kind, seed) in (0u8..5).flat_map(|k| (0..4u64).map(move |s| (k, s))) {
        let set = random_set(kind, seed);
        let q = uniform_vec(&mut rng(seed), set.dim(), 2.0);
        let op = Operator::affine(DMatrix::identity(set.dim(), set.dim()) * 2.0, q, 2.0).unwrap();
        let res = oracle::solve_reference(&set, &op, 1e-9).unwrap();
        assert!(res.residual <= 1e-9);
        assert!(set.contains(&res.x_star, 1e-9).unwrap());
        let (gap, _) = solver::fw_gap(&set, &op, &res.x_star, TieRule::default()).unwrap();
        assert!((gap - res.residual).abs() <= 1e-15);
    }
}

#[test]
fn uniqueness_on_shipped_sets() {
    let sets = [unit_box(3), vifw::sets::FeasibleSet::simplex(3).unwrap(), simplex_pair(2, 3)];
    for set in &sets {
        let q = uniform_vec(&mut rng(8), set.dim(), 1.0);
        let op = Operator::affine(DMatrix::identity(set.dim(), set.dim()) * 2.0, q, 2.0).unwrap();
        let opts = ExtragradientOptions::default().tol(1e-8);
        let report = oracle::uniqueness_check(set, &op, 10, 21, &opts).unwrap();
        assert!(report.max_pairwise_distance <= 1e-6, "{}", report.max_pairwise_distance);
        assert!(report.passed());
        // adding the two variational inequalities: <F(x) - F(y), x - y> <= 0 up to the tolerances
        let (x, y) = (&report.solutions[0], &report.solutions[1]);
        let inner = (op.evaluate(x).unwrap() - op.evaluate(y).unwrap()).dot(&(x - y));
        assert!(inner <= 2.0 * opts.tol);
    }
}

#[test]
fn skew_games_use_a_certified_average_or_last_iterate() {
    let set = simplex_pair(3, 3);
    let op = Operator::fictitious_play(common::rps()).unwrap();
    let res =
        oracle::extragradient(&set, &op, &set.vertex(0).unwrap(), &ExtragradientOptions::default().tol(1e-8))
            .unwrap();
    assert!(matches!(res.method, OracleMethod::ExtragradientLast | OracleMethod::ExtragradientErgodic));
    assert!(res.residual <= 1e-8);
    let third = 1.0 / 3.0;
    assert!(res.x_star.iter().all(|v| (v - third).abs() <= 1e-4));

    let (set, op) = lp_saddle_instance();
    let res = oracle::solve_reference(&set, &op, 1e-10).unwrap();
    assert!((&res.x_star - dvector![0.4, 0.2, 0.4, 0.2]).amax() <= 1e-6);
}

#[test]
fn brute_force_gap_counts_every_vertex() {
    let set = simplex_pair(2, 2);
    let op = Operator::fictitious_play(DMatrix::identity(2, 2)).unwrap();
    assert_eq!(oracle::brute_force_gap(&set, &op, &dvector![1.0, 0.0, 1.0, 0.0]).unwrap(), 1.0);
    assert_eq!(oracle::brute_force_gap(&set, &op, &dvector![0.5, 0.5, 0.5, 0.5]).unwrap(), 0.0);
}
