//! Saddle point of a box-constrained LP Lagrangian, with Jacobi and
//! block Gauss-Seidel updates.

use nalgebra::{dmatrix, dvector};
use vifw::operators::Operator;
use vifw::oracle;
use vifw::sets::FeasibleSet;
use vifw::solver::{self, SolveOptions, StepSchedule};

fn main() -> vifw::Result<()> {
    let unit = FeasibleSet::box_set(dvector![0.0, 0.0], dvector![1.0, 1.0])?;
    let set = FeasibleSet::product(vec![unit.clone(), unit])?;
    let op = Operator::lp_saddle(dmatrix![2.0, 1.0; 1.0, 3.0], dvector![1.0, 1.0], dvector![1.0, 1.0])?;
    let x_star = oracle::solve_reference(&set, &op, 1e-10)?.x_star;
    println!("reference (x, y) = {:.5?}", x_star.as_slice());

    for gauss_seidel in [false, true] {
        let opts = SolveOptions::new(100_000).oracle_solution(x_star.clone()).gauss_seidel(gauss_seidel);
        let trace = solver::solve(&set, &op, &StepSchedule::Harmonic, &set.centroid(), &opts)?;
        println!(
            "{:<13} running-min gap {:.3e}, final distance {:.3e}",
            if gauss_seidel { "gauss-seidel" } else { "jacobi" },
            trace.min_gap,
            trace.last().dist.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
