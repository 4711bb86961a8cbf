//! Running-min gap under several step schedules on the same game.

use nalgebra::dmatrix;
use vifw::operators::Operator;
use vifw::sets::FeasibleSet;
use vifw::solver::{self, SolveOptions, StepSchedule};

fn main() -> vifw::Result<()> {
    let set = FeasibleSet::product(vec![FeasibleSet::simplex(3)?, FeasibleSet::simplex(3)?])?;
    let op = Operator::fictitious_play(dmatrix![0.0, -1.0, 1.0; 1.0, 0.0, -1.0; -1.0, 1.0, 0.0])?;
    let x0 = set.vertex(0)?;
    let schedules = [
        StepSchedule::Harmonic,
        StepSchedule::power_law(0.7, 1.0)?,
        StepSchedule::power_law(0.5, 1.0)?,
        StepSchedule::power_law(1.0, 2.0)?,
    ];

    print!("{:>7}", "k");
    for s in &schedules {
        print!("{:>12}", s.label());
    }
    println!();
    let runs = schedules
        .iter()
        .map(|s| solver::solve(&set, &op, s, &x0, &SolveOptions::new(10_000)).map(|t| t.running_min_gap()))
        .collect::<vifw::Result<Vec<_>>>()?;
    for k in [10, 100, 1000, 10_000] {
        print!("{k:>7}");
        for r in &runs {
            print!("{:>12.2e}", r[k]);
        }
        println!();
    }
    Ok(())
}
