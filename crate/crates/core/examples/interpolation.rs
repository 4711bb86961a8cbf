//! The piecewise-linear curve through Frank-Wolfe iterates, indexed by
//! accumulated step length.

use nalgebra::DMatrix;
use vifw::dynamics;
use vifw::operators::Operator;
use vifw::sets::FeasibleSet;
use vifw::solver::{self, SolveOptions, StepSchedule};

fn main() -> vifw::Result<()> {
    let set = FeasibleSet::product(vec![FeasibleSet::simplex(2)?, FeasibleSet::simplex(2)?])?;
    let op = Operator::fictitious_play(DMatrix::identity(2, 2))?;
    let trace = solver::solve(&set, &op, &StepSchedule::Harmonic, &set.vertex(0)?, &SolveOptions::new(200))?;
    let w = dynamics::interpolate(&trace)?;

    println!("curve spans tau in [{:.3}, {:.3}]", w.start(), w.end());
    for t in [0.0, 0.5, 1.0, 1.25, 2.0, w.end()] {
        println!("w({t:.3}) = {:.4?}", w.at(t)?.as_slice());
    }
    println!("Lipschitz estimate {:.6} vs diameter {:.6}", w.lipschitz_estimate(10_000, 1), set.diameter());
    let k = 7;
    let row = &trace.rows[k];
    println!(
        "slope on segment {k}: {:.4?} (s_k - x_k = {:.4?})",
        w.slope(k).as_slice(),
        (&row.s - &row.x).as_slice()
    );

    let report = dynamics::perturbation_bound(&trace, &set)?;
    println!("perturbation bound holds on every segment: {}", report.holds());
    Ok(())
}
