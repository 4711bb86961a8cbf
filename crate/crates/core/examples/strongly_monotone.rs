//! Iterates of a strongly monotone affine problem approach the unique solution.

use nalgebra::{DMatrix, DVector};
use vifw::operators::Operator;
use vifw::oracle;
use vifw::sets::FeasibleSet;
use vifw::solver::{self, SolveOptions, StepSchedule};

fn main() -> vifw::Result<()> {
    let set = FeasibleSet::simplex(3)?;
    let op = Operator::affine(DMatrix::identity(3, 3) * 2.0, DVector::from_vec(vec![-0.2, 0.1, 0.3]), 2.0)?;

    let reference = oracle::solve_reference(&set, &op, 1e-12)?;
    println!(
        "x* = {:.6?} ({:?}, {:?} iterations)",
        reference.x_star.as_slice(),
        reference.method,
        reference.iterations
    );

    let opts = SolveOptions::new(10_000).oracle_solution(reference.x_star.clone());
    let trace = solver::solve(&set, &op, &StepSchedule::Harmonic, &set.vertex(0)?, &opts)?;
    for row in trace.rows.iter().filter(|r| r.k.is_power_of_two() || r.k == 10_000) {
        println!(
            "k = {:>5}  gap = {:.3e}  |x_k - x*| = {:.3e}",
            row.k,
            row.gap,
            row.dist.unwrap_or(f64::NAN)
        );
    }

    let unique =
        oracle::uniqueness_check(&set, &op, 10, 42, &oracle::ExtragradientOptions::default().tol(1e-8))?;
    println!("10 oracle starts agree to {:.2e}", unique.max_pairwise_distance);
    Ok(())
}
