mod common;

use common::{rng, rps, uniform_mat, uniform_vec};
use nalgebra::DMatrix;
use proptest::prelude::*;
use vifw::operators::Operator;

fn shipped_variants(seed: u64) -> Vec<Operator> {
    let mut r = rng(seed);
    let a = uniform_mat(&mut r, 3, 4, 2.0);
    let g = uniform_mat(&mut r, 3, 3, 1.0);
    let spd = g.transpose() * &g + DMatrix::identity(3, 3) * 0.5;
    let skew = &g - g.transpose();
    vec![
        Operator::fictitious_play(a.clone()).unwrap(),
        Operator::fictitious_play(rps()).unwrap(),
        Operator::lp_saddle(a, uniform_vec(&mut r, 3, 1.0), uniform_vec(&mut r, 4, 1.0)).unwrap(),
        Operator::affine(DMatrix::identity(4, 4) * 2.0, uniform_vec(&mut r, 4, 1.0), 2.0).unwrap(),
        Operator::affine_auto(&spd + &skew, uniform_vec(&mut r, 3, 1.0)).unwrap(),
        Operator::affine(skew, uniform_vec(&mut r, 3, 1.0), 0.0).unwrap(),
        Operator::saddle_quadratic(
            spd.clone(),
            spd * 2.0,
            uniform_mat(&mut r, 3, 3, 1.0),
            uniform_vec(&mut r, 6, 1.0),
        )
        .unwrap(),
    ]
}

#[test]
fn shipped_variants_are_monotone_with_declared_modulus() {
    for (i, op) in shipped_variants(17).iter().enumerate() {
        let report = op.check_monotone(10_000, 3);
        assert_eq!(report.trials, 10_000);
        assert!(report.min_ratio >= op.mu() - 1e-9, "variant {i}: {report:?}");
        assert!(report.passed(), "variant {i}");
    }
}

#[test]
fn declared_modulus_below_truth_is_rejected() {
    assert!(Operator::affine(DMatrix::identity(2, 2), nalgebra::dvector![0.0, 0.0], 1.5).is_err());
}

proptest! {
    #[test]
    fn skew_variants_have_zero_monotonicity_product(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = uniform_mat(&mut r, 4, 4, 2.0);
        let a = uniform_mat(&mut r, 2, 2, 2.0);
        let ops = [
            Operator::fictitious_play(a.clone()).unwrap(),
            Operator::lp_saddle(a, uniform_vec(&mut r, 2, 1.0), uniform_vec(&mut r, 2, 1.0)).unwrap(),
            Operator::affine(&g - g.transpose(), uniform_vec(&mut r, 4, 1.0), 0.0).unwrap(),
        ];
        for op in &ops {
            let x = uniform_vec(&mut r, 4, 3.0);
            let y = uniform_vec(&mut r, 4, 3.0);
            let inner = (op.evaluate(&x).unwrap() - op.evaluate(&y).unwrap()).dot(&(&x - &y));
            prop_assert!(inner.abs() <= 1e-10, "{inner:e}");
        }
    }

    #[test]
    fn finite_differences_match_linear_part(seed in any::<u64>()) {
        for op in shipped_variants(seed) {
            let x = uniform_vec(&mut rng(seed), op.dim(), 2.0);
            let fd = op.jacobian_fd(&x, 1e-5).unwrap();
            prop_assert!((fd - op.jacobian()).amax() <= 1e-8);
        }
    }

    #[test]
    fn scaling_scales_values(seed in any::<u64>(), c in 0.01f64..100.0) {
        for op in shipped_variants(seed) {
            let x = uniform_vec(&mut rng(seed), op.dim(), 2.0);
            let lhs = op.scaled(c).unwrap().evaluate(&x).unwrap();
            let rhs = op.evaluate(&x).unwrap() * c;
            prop_assert!((lhs - &rhs).amax() <= 1e-12 * (1.0 + rhs.amax()));
        }
    }
}
