//! Projection-free Frank-Wolfe iteration for monotone variational
//! inequalities over compact convex sets, with best-response dynamics,
//! an extragradient reference solver and a JSON-driven experiment runner.
//!
//! ```
//! use nalgebra::DMatrix;
//! use vifw::operators::Operator;
//! use vifw::sets::FeasibleSet;
//! use vifw::solver::{solve, SolveOptions, StepSchedule};
//!
//! let set = FeasibleSet::product(vec![FeasibleSet::simplex(2)?, FeasibleSet::simplex(2)?])?;
//! let op = Operator::fictitious_play(DMatrix::identity(2, 2))?;
//! let trace = solve(&set, &op, &StepSchedule::Harmonic, &set.vertex(0)?, &SolveOptions::new(1000))?;
//! assert!(trace.min_gap < 0.05);
//! # Ok::<(), vifw::Error>(())
//! ```

// `!(x > 0.0)` style guards are deliberate: they reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod dynamics;
pub mod error;
pub mod harness;
pub mod operators;
pub mod oracle;
pub mod sets;
pub mod solver;

pub use error::{Error, Result};
