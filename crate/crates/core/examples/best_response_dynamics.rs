//! Euler integration of best-response dynamics and the exponential decay of
//! the gap along the path.

use nalgebra::DMatrix;
use vifw::dynamics;
use vifw::operators::Operator;
use vifw::sets::{FeasibleSet, TieRule};

fn main() -> vifw::Result<()> {
    let set = FeasibleSet::product(vec![FeasibleSet::simplex(2)?, FeasibleSet::simplex(2)?])?;
    let op = Operator::fictitious_play(DMatrix::identity(2, 2))?;
    let rule = TieRule::default();

    let traj = dynamics::integrate_br(&set, &op, &set.vertex(0)?, 8.0, 1e-3, rule)?;
    let report = dynamics::decay_check(&traj, &set, &op, rule)?;
    for t in [0usize, 1000, 2000, 4000, 8000] {
        let v = report.gaps[t];
        println!(
            "t = {:>4.1}  V = {:.5}  e^-t V(0) = {:.5}",
            traj.times()[t],
            v,
            (-traj.times()[t]).exp() * report.gaps[0]
        );
    }
    println!(
        "decay check {} (tolerance {:.3e}, {} step violations)",
        if report.passed() { "passed" } else { "failed" },
        report.tol,
        report.step_violations
    );
    Ok(())
}
