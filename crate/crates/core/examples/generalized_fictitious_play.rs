//! Generalized fictitious play: a strongly monotone saddle problem over a
//! product of simplices, run with 1/k steps.

use nalgebra::{dmatrix, dvector, DMatrix};
use vifw::operators::Operator;
use vifw::oracle;
use vifw::sets::FeasibleSet;
use vifw::solver::{self, SolveOptions, StepSchedule};

fn main() -> vifw::Result<()> {
    let set = FeasibleSet::product(vec![FeasibleSet::simplex(3)?, FeasibleSet::simplex(3)?])?;
    let b = dmatrix![0.0, -1.0, 1.0; 1.0, 0.0, -1.0; -1.0, 1.0, 0.0];
    let q = dvector![0.2, -0.1, 0.0, 0.0, 0.3, -0.2];
    let op = Operator::saddle_quadratic(DMatrix::identity(3, 3), DMatrix::identity(3, 3) * 0.5, b, q)?;
    println!("modulus of strong monotonicity: {}", op.mu());

    let x_star = oracle::solve_reference(&set, &op, 1e-12)?.x_star;
    let opts = SolveOptions::new(10_000).oracle_solution(x_star.clone());
    let trace = solver::solve(&set, &op, &StepSchedule::Harmonic, &set.vertex(0)?, &opts)?;
    for k in [10, 100, 1000, 10_000] {
        let row = &trace.rows[k];
        println!("k = {:>5}  |x_k - x*| = {:.3e}", k, row.dist.unwrap_or(f64::NAN));
    }
    println!("x* = {:.5?}", x_star.as_slice());
    Ok(())
}
