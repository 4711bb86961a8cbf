//! Continuous-time view of the iteration.
//!
//! A trace `(tau_k, x_k)` is interpolated piecewise linearly into a curve
//! `w(t)` whose slope on `(tau_k, tau_{k+1})` is `s_k - x_k`, so `w` follows
//! the best-response field `lmo(F(x)) - x` up to a perturbation that
//! shrinks with the step sizes. The best-response inclusion itself is
//! integrated by explicit Euler, which is the iteration run with a
//! constant step.

use std::io::Write;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_dim, Error, Result};
use crate::operators::Operator;
use crate::sets::{FeasibleSet, TieRule};
use crate::solver::{self, fmt_f64, SolveOptions, SolverTrace, StepSchedule, Thinning};

/// Piecewise linear curve through `(times[k], points[k])`.
///
/// Segment `k` has length `steps[k]`; the interpolation weight is
/// `theta(t) = (t - times[k]) / steps[k]`, so the slope on a segment is
/// `(x_{k+1} - x_k) / steps[k]` computed from the step actually taken.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    steps: Vec<f64>,
    points: Vec<DVector<f64>>,
}

impl Trajectory {
    /// Builds a trajectory from breakpoints and segment lengths.
    /// `steps.len()` must be `points.len() - 1`.
    pub fn new(times: Vec<f64>, steps: Vec<f64>, points: Vec<DVector<f64>>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::TraceTooShort { needed: 2, found: points.len() });
        }
        if times.len() != points.len() || steps.len() + 1 != points.len() {
            return Err(Error::InvalidArgument(
                "trajectory needs one time per point and one step per segment".into(),
            ));
        }
        let n = points[0].len();
        for p in &points {
            check_dim(n, p.len())?;
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("breakpoint times must be strictly increasing".into()));
        }
        if steps.iter().any(|&g| !(g > 0.0)) {
            return Err(Error::InvalidArgument("segment lengths must be positive".into()));
        }
        Ok(Self { times, steps, points })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn steps(&self) -> &[f64] {
        &self.steps
    }

    pub fn points(&self) -> &[DVector<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    /// `w(t)` for `t` in `[start, end]`. Exact at breakpoints.
    pub fn at(&self, t: f64) -> Result<DVector<f64>> {
        if !(t >= self.start() && t <= self.end()) {
            return Err(Error::InvalidArgument(format!(
                "t = {t} outside [{}, {}]",
                self.start(),
                self.end()
            )));
        }
        // index of the last breakpoint <= t
        let k = self.times.partition_point(|&tau| tau <= t) - 1;
        if self.times[k] == t {
            return Ok(self.points[k].clone());
        }
        let theta = ((t - self.times[k]) / self.steps[k]).clamp(0.0, 1.0);
        let (a, b) = (&self.points[k], &self.points[k + 1]);
        Ok(a.zip_map(b, |ai, bi| (1.0 - theta) * ai + theta * bi))
    }

    /// Slope of segment `k`, `(x_{k+1} - x_k) / steps[k]`.
    pub fn slope(&self, k: usize) -> DVector<f64> {
        (&self.points[k + 1] - &self.points[k]) / self.steps[k]
    }

    /// Largest `||w(t) - w(t')|| / |t - t'|` over `samples` random time pairs.
    pub fn lipschitz_estimate(&self, samples: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (lo, hi) = (self.start(), self.end());
        let mut best = 0.0_f64;
        for _ in 0..samples {
            let t = lo + rng.gen::<f64>() * (hi - lo);
            let u = lo + rng.gen::<f64>() * (hi - lo);
            if t == u {
                continue;
            }
            // both lie in [lo, hi] by construction
            let (wt, wu) = (self.at(t).unwrap_or_default(), self.at(u).unwrap_or_default());
            best = best.max((wt - wu).norm() / (t - u).abs());
        }
        best
    }

    /// CSV in the trace layout without the `s` columns: `gamma` is the
    /// length of the segment ending at the row (0 on the first row), `gap`
    /// is filled from `gaps` when given.
    pub fn write_csv<W: Write>(&self, mut w: W, gaps: Option<&[f64]>) -> std::io::Result<()> {
        let n = self.points[0].len();
        solver::write_header(&mut w, n, false)?;
        for (j, (t, x)) in self.times.iter().zip(&self.points).enumerate() {
            let gamma = if j == 0 { 0.0 } else { self.steps[j - 1] };
            write!(w, "{j},{},{},", fmt_f64(*t), fmt_f64(gamma))?;
            if let Some(v) = gaps.and_then(|g| g.get(j)) {
                write!(w, "{}", fmt_f64(*v))?;
            }
            // empty dist column
            write!(w, ",")?;
            for v in x.iter() {
                write!(w, ",{}", fmt_f64(*v))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// The interpolating curve `w` of a full (unthinned) trace.
pub fn interpolate(trace: &SolverTrace) -> Result<Trajectory> {
    if trace.is_thinned() {
        return Err(Error::ThinnedTrace);
    }
    if trace.rows.len() < 2 {
        return Err(Error::TraceTooShort { needed: 2, found: trace.rows.len() });
    }
    let times = trace.rows.iter().map(|r| r.tau).collect();
    let steps = trace.rows[1..].iter().map(|r| r.gamma).collect();
    let points = trace.rows.iter().map(|r| r.x.clone()).collect();
    Trajectory::new(times, steps, points)
}

/// Per-segment perturbation radii `delta_k = gamma_{k+1} diam(C)` with the
/// observed `sup ||x_k - w(t)||` over sampled interior times.
#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationReport {
    pub deltas: Vec<f64>,
    pub sup_distances: Vec<f64>,
}

impl PerturbationReport {
    /// Whether `sup ||x_k - w(t)|| < delta_k` on every segment.
    pub fn holds(&self) -> bool {
        self.deltas.iter().zip(&self.sup_distances).all(|(d, s)| s < d)
    }
}

/// Interior fractions of each segment at which the distance is sampled.
const INTERIOR_THETAS: [f64; 5] = [0.1, 0.25, 0.5, 0.75, 0.999];

pub fn perturbation_bound(trace: &SolverTrace, set: &FeasibleSet) -> Result<PerturbationReport> {
    let w = interpolate(trace)?;
    check_dim(set.dim(), w.points[0].len())?;
    let diam = set.diameter();
    let mut deltas = Vec::with_capacity(w.steps.len());
    let mut sups = Vec::with_capacity(w.steps.len());
    for (k, &gamma) in w.steps.iter().enumerate() {
        deltas.push(gamma * diam);
        let mut sup = 0.0_f64;
        for theta in INTERIOR_THETAS {
            let t = w.times[k] + theta * gamma;
            if t >= w.times[k + 1] {
                continue;
            }
            sup = sup.max((&w.points[k] - w.at(t)?).norm());
        }
        sups.push(sup);
    }
    Ok(PerturbationReport { deltas, sup_distances: sups })
}

/// Explicit Euler for `x' in lmo(F(x)) - x` with step `h` up to `t_end`:
/// `x_{j+1} = x_j + h (lmo(F(x_j)) - x_j)`, breakpoints at `j h`.
///
/// This is the iteration under the constant schedule `gamma_k = h` and runs
/// through the same solver loop, so the iterates are bitwise identical to
/// `solve` with `StepSchedule::constant(h, ..)`. Steps in `(0, 1]` keep every
/// iterate a convex combination of points of the set; `h <= 0.01` is the
/// useful range for approximating the continuous dynamics.
pub fn integrate_br(
    set: &FeasibleSet,
    op: &Operator,
    x0: &DVector<f64>,
    t_end: f64,
    h: f64,
    rule: TieRule,
) -> Result<Trajectory> {
    if !(h > 0.0 && h <= 1.0) {
        return Err(Error::InvalidArgument(format!("Euler step h must lie in (0, 1], got {h}")));
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidArgument(format!("t_end must be positive, got {t_end}")));
    }
    let n_steps = euler_steps(t_end, h);
    let schedule = StepSchedule::constant(h, n_steps)?;
    let opts = SolveOptions::new(n_steps).rule(rule).thinning(Thinning::Full);
    let trace = solver::solve(set, op, &schedule, x0, &opts)?;
    let times = (0..trace.rows.len()).map(|j| j as f64 * h).collect();
    let points = trace.rows.into_iter().map(|r| r.x).collect();
    Trajectory::new(times, vec![h; n_steps], points)
}

/// Number of Euler steps needed to reach `t_end`.
pub fn euler_steps(t_end: f64, h: f64) -> usize {
    // absorb representation error, e.g. 8 / 1e-3 = 7999.999...
    ((t_end / h) * (1.0 - 1e-12)).ceil().max(1.0) as usize
}

/// Constant in the Euler tolerance `tol(h) = DECAY_TOL_FACTOR h (1 + max V)`.
pub const DECAY_TOL_FACTOR: f64 = 10.0;

/// Discrete check of `V(x(t)) <= e^{-t} V(x(0))` along a Euler trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayReport {
    /// `V(x_j)` at every breakpoint.
    pub gaps: Vec<f64>,
    /// `u_j = e^{t_j} V(x_j)`.
    pub u: Vec<f64>,
    /// `max_j (u_{j+1} - u_j)`, in undiscounted units.
    pub max_forward_increase: f64,
    /// `tol(h) = 10 h (1 + max_j V(x_j))`.
    pub tol: f64,
    /// Steps with `e^{-t_{j+1}} (u_{j+1} - u_j) > tol`, i.e. the one-step
    /// inequality `V_{j+1} <= e^{-h} V_j` broken by more than `tol`.
    pub step_violations: usize,
    /// Breakpoints with `V_j > e^{-t_j} V_0 + tol`.
    pub envelope_violations: usize,
}

impl DecayReport {
    pub fn violation_fraction(&self) -> f64 {
        let steps = self.gaps.len().saturating_sub(1).max(1);
        self.step_violations as f64 / steps as f64
    }

    pub fn passed(&self) -> bool {
        self.step_violations == 0 && self.envelope_violations == 0
    }

    pub fn max_gap(&self) -> f64 {
        self.gaps.iter().fold(0.0, |m: f64, &v| m.max(v))
    }
}

pub fn decay_check(
    traj: &Trajectory,
    set: &FeasibleSet,
    op: &Operator,
    rule: TieRule,
) -> Result<DecayReport> {
    let gaps = traj
        .points
        .iter()
        .map(|x| solver::fw_gap(set, op, x, rule).map(|(g, _)| g))
        .collect::<Result<Vec<_>>>()?;
    let h = traj.steps.iter().fold(0.0_f64, |m, &g| m.max(g));
    let max_v = gaps.iter().fold(0.0_f64, |m, &v| m.max(v));
    let tol = DECAY_TOL_FACTOR * h * (1.0 + max_v);
    let u: Vec<f64> = traj.times.iter().zip(&gaps).map(|(t, v)| (t - traj.start()).exp() * v).collect();

    let mut max_forward_increase = f64::NEG_INFINITY;
    let mut step_violations = 0;
    for j in 0..u.len() - 1 {
        let inc = u[j + 1] - u[j];
        max_forward_increase = max_forward_increase.max(inc);
        let dt = traj.times[j + 1] - traj.times[j];
        if gaps[j + 1] - (-dt).exp() * gaps[j] > tol {
            step_violations += 1;
        }
    }
    let envelope_violations = traj
        .times
        .iter()
        .zip(&gaps)
        .filter(|(t, v)| **v > (-(*t - traj.start())).exp() * gaps[0] + tol)
        .count();

    Ok(DecayReport { gaps, u, max_forward_increase, tol, step_violations, envelope_violations })
}
