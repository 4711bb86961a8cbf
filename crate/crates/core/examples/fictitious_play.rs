//! Fictitious play on rock-paper-scissors as Frank-Wolfe with harmonic steps.

use nalgebra::{dmatrix, DVector};
use vifw::operators::Operator;
use vifw::sets::FeasibleSet;
use vifw::solver::{self, SolveOptions, StepSchedule};

fn main() -> vifw::Result<()> {
    let rps = dmatrix![0.0, -1.0, 1.0; 1.0, 0.0, -1.0; -1.0, 1.0, 0.0];
    let set = FeasibleSet::product(vec![FeasibleSet::simplex(3)?, FeasibleSet::simplex(3)?])?;
    let op = Operator::fictitious_play(rps)?;
    let x0 = set.vertex(0)?;

    let trace = solver::solve(&set, &op, &StepSchedule::Harmonic, &x0, &SolveOptions::new(20_000))?;
    for row in trace.rows.iter().filter(|r| [1, 10, 100, 1000, 10_000, 20_000].contains(&r.k)) {
        println!("k = {:>6}  gap = {:.5}", row.k, row.gap);
    }

    // with 1/k steps the iterate is the empirical mix of past best responses
    let k = 500;
    let mean = trace.rows[..k].iter().fold(DVector::zeros(6), |acc, r| acc + &r.s) / k as f64;
    println!("|x_500 - mean(s_0..s_499)| = {:.2e}", (&trace.rows[k].x - mean).norm());
    println!("final strategies: {:.4?}", trace.last().x.as_slice());
    Ok(())
}
