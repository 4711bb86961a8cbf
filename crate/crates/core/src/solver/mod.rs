//! The Frank-Wolfe iteration for variational inequalities
//!
//! ```text
//! x_{k+1} = x_k + gamma_{k+1} (s_k - x_k),   s_k = lmo(F(x_k))
//! ```
//!
//! together with the gap `V(x) = max_{s in C} <F(x), x - s>`, which is
//! nonnegative on `C` and vanishes exactly on the solution set.

mod schedule;
mod trace;

pub use schedule::StepSchedule;
pub(crate) use trace::write_header;
pub use trace::{fmt_f64, SolverTrace, TraceRow};

use nalgebra::DVector;

use crate::error::{check_dim, Error, Result};
use crate::operators::Operator;
use crate::sets::{FeasibleSet, SetKind, TieRule};

/// Membership tolerance for iterates.
pub const FEAS_TOL: f64 = 1e-9;

/// Rows kept before [`Thinning::Auto`] starts dropping iterates.
pub const MAX_FULL_ROWS: usize = 100_000;

/// Which iterates a trace keeps.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Thinning {
    /// Every iterate up to `MAX_FULL_ROWS` iterations; beyond that every
    /// `ceil(max_iter / MAX_FULL_ROWS)`-th row plus the final one.
    #[default]
    Auto,
    Full,
    Every(usize),
}

impl Thinning {
    fn stride(self, max_iter: usize) -> usize {
        match self {
            Self::Auto if max_iter > MAX_FULL_ROWS => max_iter.div_ceil(MAX_FULL_ROWS),
            Self::Auto | Self::Full => 1,
            Self::Every(n) => n.max(1),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOptions {
    pub rule: TieRule,
    pub max_iter: usize,
    /// Stop once the running-min gap is `<= gap_tol`; 0 runs to `max_iter`.
    pub gap_tol: f64,
    pub oracle_solution: Option<DVector<f64>>,
    pub thinning: Thinning,
    /// Experimental block-sequential update on product sets: each factor
    /// takes its LMO step against `F` evaluated at the point already updated
    /// in the earlier factors. No convergence guarantee is known.
    pub gauss_seidel: bool,
}

impl SolveOptions {
    pub fn new(max_iter: usize) -> Self {
        Self {
            rule: TieRule::default(),
            max_iter,
            gap_tol: 0.0,
            oracle_solution: None,
            thinning: Thinning::default(),
            gauss_seidel: false,
        }
    }

    pub fn gap_tol(mut self, tol: f64) -> Self {
        self.gap_tol = tol;
        self
    }

    pub fn rule(mut self, rule: TieRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn oracle_solution(mut self, x: DVector<f64>) -> Self {
        self.oracle_solution = Some(x);
        self
    }

    pub fn thinning(mut self, thinning: Thinning) -> Self {
        self.thinning = thinning;
        self
    }

    pub fn gauss_seidel(mut self, on: bool) -> Self {
        self.gauss_seidel = on;
        self
    }
}

fn ensure_feasible(set: &FeasibleSet, x: &DVector<f64>) -> Result<()> {
    let residual = set.residual(x)?;
    if !(residual <= FEAS_TOL) {
        return Err(Error::Infeasible { residual });
    }
    Ok(())
}

fn check_problem(set: &FeasibleSet, op: &Operator) -> Result<()> {
    check_dim(set.dim(), op.dim())
}

/// LMO direction at `x` and the gap `<F(x), x - s>`.
fn probe(set: &FeasibleSet, op: &Operator, x: &DVector<f64>, rule: TieRule) -> (f64, DVector<f64>) {
    let f = op.apply(x);
    let mut s = DVector::zeros(x.len());
    set.lmo_into(f.as_slice(), rule, s.as_mut_slice());
    let gap = f.iter().zip(x.iter().zip(s.iter())).map(|(fi, (xi, si))| fi * (xi - si)).sum();
    (gap, s)
}

/// Gap without the membership check, for callers that already know `x` is
/// feasible.
pub(crate) fn gap_at(set: &FeasibleSet, op: &Operator, x: &DVector<f64>, rule: TieRule) -> f64 {
    probe(set, op, x, rule).0
}

/// `x + gamma (s - x)`, the single update formula shared by the solver and
/// the Euler integrator.
pub(crate) fn advance(x: &DVector<f64>, s: &DVector<f64>, gamma: f64) -> DVector<f64> {
    x.zip_map(s, |xi, si| xi + gamma * (si - xi))
}

/// The Frank-Wolfe gap `V(x)` and the LMO point attaining it.
pub fn fw_gap(
    set: &FeasibleSet,
    op: &Operator,
    x: &DVector<f64>,
    rule: TieRule,
) -> Result<(f64, DVector<f64>)> {
    check_problem(set, op)?;
    check_dim(set.dim(), x.len())?;
    ensure_feasible(set, x)?;
    Ok(probe(set, op, x, rule))
}

/// One update from iterate `k`, using `gamma_{k+1}`. Returns `(x_{k+1}, s_k)`.
pub fn fw_step(
    set: &FeasibleSet,
    op: &Operator,
    x: &DVector<f64>,
    k: usize,
    schedule: &StepSchedule,
    rule: TieRule,
) -> Result<(DVector<f64>, DVector<f64>)> {
    check_problem(set, op)?;
    check_dim(set.dim(), x.len())?;
    ensure_feasible(set, x)?;
    let gamma = schedule.step_size(k + 1)?;
    let (_, s) = probe(set, op, x, rule);
    Ok((advance(x, &s, gamma), s))
}

/// Block-sequential step: factor `i` uses `F` at the point whose earlier
/// factors already moved.
fn gauss_seidel_step(
    set: &FeasibleSet,
    op: &Operator,
    x: &DVector<f64>,
    gamma: f64,
    rule: TieRule,
) -> (DVector<f64>, DVector<f64>) {
    let mut z = x.clone();
    let mut s = DVector::zeros(x.len());
    for (range, factor) in set.blocks() {
        let f = op.apply(&z);
        factor.lmo_into(&f.as_slice()[range.clone()], rule, &mut s.as_mut_slice()[range.clone()]);
        for i in range {
            z[i] += gamma * (s[i] - z[i]);
        }
    }
    (z, s)
}

fn has_polytope(set: &FeasibleSet) -> bool {
    match set.kind() {
        SetKind::VertexPolytope(_) => true,
        SetKind::Product(factors) => factors.iter().any(has_polytope),
        _ => false,
    }
}

/// Runs the iteration from `x0` until `max_iter` or until the running-min
/// gap drops to `gap_tol`. Row `k = 0` is always recorded, so
/// `max_iter = 1` yields two rows.
pub fn solve(
    set: &FeasibleSet,
    op: &Operator,
    schedule: &StepSchedule,
    x0: &DVector<f64>,
    opts: &SolveOptions,
) -> Result<SolverTrace> {
    check_problem(set, op)?;
    check_dim(set.dim(), x0.len())?;
    if opts.max_iter == 0 {
        return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
    }
    if !(opts.gap_tol >= 0.0) {
        return Err(Error::InvalidArgument(format!("gap_tol must be >= 0, got {}", opts.gap_tol)));
    }
    if let Some(h) = schedule.horizon() {
        if h < opts.max_iter {
            return Err(Error::InvalidSchedule(format!(
                "explicit schedule has {h} steps but max_iter is {}",
                opts.max_iter
            )));
        }
    }
    if let Some(xs) = &opts.oracle_solution {
        check_dim(set.dim(), xs.len())?;
    }
    let blocks = set.blocks().len();
    if opts.gauss_seidel && blocks < 2 {
        return Err(Error::InvalidArgument(
            "gauss_seidel requires a product set with at least two factors".into(),
        ));
    }
    ensure_feasible(set, x0)?;
    // iterates of polytope sets are convex combinations of vertices; the
    // membership test there costs a projection, so only the final one is checked
    let check_each = !has_polytope(set);

    let stride = opts.thinning.stride(opts.max_iter);
    let mut rows = Vec::with_capacity(opts.max_iter / stride + 2);
    let mut x = x0.clone();
    let mut tau = 0.0;
    let mut gamma = 0.0;
    let mut min_gap = f64::INFINITY;
    let mut converged;
    let mut k = 0;

    loop {
        let (gap, mut s) = probe(set, op, &x, opts.rule);
        if !gap.is_finite() || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("iterate k = {k}")));
        }
        if gap < -1e-12 {
            return Err(Error::InvariantBreach(format!("negative gap {gap:e} at k = {k}")));
        }
        if check_each {
            let r = set.residual(&x)?;
            if !(r <= FEAS_TOL) {
                return Err(Error::InvariantBreach(format!(
                    "iterate k = {k} left the feasible set (residual {r:e})"
                )));
            }
        }
        min_gap = min_gap.min(gap);
        converged = opts.gap_tol > 0.0 && min_gap <= opts.gap_tol;
        let last = converged || k == opts.max_iter;

        let next = if last {
            None
        } else {
            let g = schedule.step_size(k + 1)?;
            let x_next = if opts.gauss_seidel {
                let (z, s_gs) = gauss_seidel_step(set, op, &x, g, opts.rule);
                s = s_gs;
                z
            } else {
                advance(&x, &s, g)
            };
            Some((g, x_next))
        };

        if last || k % stride == 0 {
            let dist = opts.oracle_solution.as_ref().map(|xs| (&x - xs).norm());
            rows.push(TraceRow { k, tau, gamma, x: x.clone(), s, gap, dist });
        }

        match next {
            None => break,
            Some((g, x_next)) => {
                x = x_next;
                gamma = g;
                tau += g;
                k += 1;
            }
        }
    }

    if !check_each {
        let r = set.residual(&x)?;
        if !(r <= FEAS_TOL) {
            return Err(Error::InvariantBreach(format!(
                "final iterate left the feasible set (residual {r:e})"
            )));
        }
    }

    Ok(SolverTrace { rows, stride, iterations: k, min_gap, converged })
}
