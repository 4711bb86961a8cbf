mod common;

use common::{enumerated_gap, hull_point, random_set, rng, simplex_pair, uniform_mat, uniform_vec};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use vifw::operators::Operator;
use vifw::sets::TieRule;
use vifw::solver::{self, SolveOptions, StepSchedule, Thinning};

fn random_affine(dim: usize, seed: u64) -> Operator {
    let mut r = rng(seed);
    let g = uniform_mat(&mut r, dim, dim, 1.0);
    let m = g.transpose() * &g + (&g - g.transpose()) + DMatrix::identity(dim, dim) * 0.1;
    Operator::affine_auto(m, uniform_vec(&mut r, dim, 1.0)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gap_is_nonnegative_and_matches_enumeration(kind in 0u8..5, seed in any::<u64>()) {
        let set = random_set(kind, seed);
        let op = random_affine(set.dim(), seed);
        let x = hull_point(&set, &mut rng(seed));
        let (gap, _) = solver::fw_gap(&set, &op, &x, TieRule::default()).unwrap();
        prop_assert!(gap >= -1e-12);
        prop_assert!((gap - enumerated_gap(&set, &op, &x)).abs() <= 1e-12 * (1.0 + gap.abs()));
    }

    #[test]
    fn iterates_stay_feasible(kind in 0u8..5, seed in any::<u64>()) {
        let set = random_set(kind, seed);
        let op = random_affine(set.dim(), seed);
        let trace = solver::solve(&set, &op, &StepSchedule::Harmonic, &set.centroid(), &SolveOptions::new(200)).unwrap();
        for row in &trace.rows {
            prop_assert!(set.contains(&row.x, 1e-9).unwrap());
            prop_assert!(row.gap >= -1e-12);
        }
    }

    #[test]
    fn scaling_the_operator_keeps_directions(seed in any::<u64>(), c in 0.05f64..20.0) {
        let set = simplex_pair(3, 4);
        let a = uniform_mat(&mut rng(seed), 3, 4, 1.0);
        let op = Operator::fictitious_play(a).unwrap();
        let x0 = set.vertex(0).unwrap();
        let opts = SolveOptions::new(300);
        let base = solver::solve(&set, &op, &StepSchedule::Harmonic, &x0, &opts).unwrap();
        let scaled = solver::solve(&set, &op.scaled(c).unwrap(), &StepSchedule::Harmonic, &x0, &opts).unwrap();
        for (a, b) in base.rows.iter().zip(&scaled.rows) {
            prop_assert_eq!(&a.s, &b.s);
            prop_assert_eq!(&a.x, &b.x);
            prop_assert!((b.gap - c * a.gap).abs() <= 1e-12 * (1.0 + b.gap.abs()));
        }
    }
}

#[test]
fn harmonic_iterates_are_running_means_of_directions() {
    for seed in 0..20 {
        let set = simplex_pair(5, 5);
        let op = Operator::fictitious_play(uniform_mat(&mut rng(seed), 5, 5, 1.0)).unwrap();
        let x0 = hull_point(&set, &mut rng(seed + 100));
        let trace = solver::solve(&set, &op, &StepSchedule::Harmonic, &x0, &SolveOptions::new(1000)).unwrap();
        let mut sum = DVector::zeros(10);
        for k in 1..=1000 {
            sum += &trace.rows[k - 1].s;
            let mean = &sum / k as f64;
            assert!((&trace.rows[k].x - mean).norm() <= 1e-10, "seed {seed}, k {k}");
        }
    }
}

#[test]
fn identical_inputs_give_identical_traces() {
    let set = simplex_pair(3, 3);
    let op = Operator::fictitious_play(common::rps()).unwrap();
    let x0 = set.centroid();
    let run = || {
        let trace = solver::solve(
            &set,
            &op,
            &StepSchedule::power_law(0.6, 1.0).unwrap(),
            &x0,
            &SolveOptions::new(5000),
        )
        .unwrap();
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        buf
    };
    assert_eq!(run(), run());
}

#[test]
fn running_min_gap_is_nonincreasing() {
    let set = simplex_pair(3, 3);
    let op = Operator::fictitious_play(common::rps()).unwrap();
    let trace =
        solver::solve(&set, &op, &StepSchedule::Harmonic, &set.vertex(0).unwrap(), &SolveOptions::new(2000))
            .unwrap();
    let mins = trace.running_min_gap();
    assert!(mins.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn long_runs_are_thinned_but_keep_statistics() {
    let set = simplex_pair(2, 2);
    let op = Operator::fictitious_play(DMatrix::identity(2, 2)).unwrap();
    let x0 = set.vertex(0).unwrap();
    let thin = solver::solve(&set, &op, &StepSchedule::Harmonic, &x0, &SolveOptions::new(250_000)).unwrap();
    assert_eq!(thin.stride, 3);
    assert_eq!(thin.last().k, 250_000);
    let full = solver::solve(
        &set,
        &op,
        &StepSchedule::Harmonic,
        &x0,
        &SolveOptions::new(250_000).thinning(Thinning::Full),
    )
    .unwrap();
    assert_eq!(full.rows.len(), 250_001);
    assert_eq!(thin.min_gap, full.min_gap);
    assert_eq!(thin.last(), full.last());
}

#[test]
fn gap_tolerance_stops_early() {
    let set = common::unit_box(2);
    let op = Operator::affine(DMatrix::identity(2, 2), nalgebra::dvector![-0.5, -0.5], 1.0).unwrap();
    let trace = solver::solve(
        &set,
        &op,
        &StepSchedule::Harmonic,
        &set.vertex(0).unwrap(),
        &SolveOptions::new(100_000).gap_tol(1e-3),
    )
    .unwrap();
    assert!(trace.converged);
    assert!(trace.iterations < 100_000);
    assert!(trace.min_gap <= 1e-3);
}
