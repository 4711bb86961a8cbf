//! Runs experiment configs and writes their CSV and JSON artifacts.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Value};

use crate::config::{ExperimentConfig, Mode};
use crate::dynamics;
use crate::error::{Error, Result};
use crate::operators::Operator;
use crate::oracle::{self, ExtragradientOptions, OracleCache, OracleResult};
use crate::sets::{FeasibleSet, TieRule};
use crate::solver::{self, fmt_f64, SolveOptions, SolverTrace, FEAS_TOL};

/// Starts used by the uniqueness check in oracle mode.
pub const UNIQUENESS_TRIALS: usize = 5;

/// Where a run reads cached oracle solutions and writes its artifacts.
#[derive(Clone, Debug)]
pub struct RunContext {
    pub cache: OracleCache,
    /// Base for relative output paths.
    pub out_dir: PathBuf,
}

impl RunContext {
    pub fn new(cache: OracleCache, out_dir: impl Into<PathBuf>) -> Self {
        Self { cache, out_dir: out_dir.into() }
    }

    /// Cache from `VIFW_CACHE_DIR`, outputs relative to the working directory.
    pub fn from_env() -> Self {
        Self::new(OracleCache::from_env(), ".")
    }

    fn resolve(&self, path: &Option<PathBuf>, default: String) -> PathBuf {
        let p = path.clone().unwrap_or_else(|| PathBuf::from(default));
        if p.is_absolute() {
            p
        } else {
            self.out_dir.join(p)
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub summary: Value,
    pub trace_path: Option<PathBuf>,
    pub summary_path: PathBuf,
}

struct Instance {
    set: FeasibleSet,
    op: Operator,
    x0: nalgebra::DVector<f64>,
    rule: TieRule,
}

fn field_error(path: &str) -> impl FnOnce(Error) -> Error + '_ {
    move |e| Error::Config { path: path.to_string(), message: e.to_string() }
}

fn build(cfg: &ExperimentConfig) -> Result<Instance> {
    let set = cfg.set.build().map_err(field_error("set"))?;
    let op = cfg.operator.build().map_err(field_error("operator"))?;
    if set.dim() != op.dim() {
        return Err(Error::Config {
            path: "operator".into(),
            message: format!("operator has dimension {} but the set has dimension {}", op.dim(), set.dim()),
        });
    }
    let x0 = cfg.x0.build(&set).map_err(field_error("x0"))?;
    if x0.len() != set.dim() {
        return Err(Error::Config {
            path: "x0".into(),
            message: format!("x0 has dimension {} but the set has dimension {}", x0.len(), set.dim()),
        });
    }
    let residual = set.residual(&x0)?;
    if residual > FEAS_TOL {
        return Err(Error::Config {
            path: "x0".into(),
            message: format!("x0 lies outside the set (residual {residual:e})"),
        });
    }
    Ok(Instance { set, op, x0, rule: cfg.tie_rule.into() })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn write_summary(path: &Path, summary: &Value) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, summary)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Executes the config's mode. Artifacts are written before any invariant
/// breach is reported, so a failed run can still be inspected.
pub fn run(cfg: &ExperimentConfig, ctx: &RunContext) -> Result<RunReport> {
    let inst = build(cfg)?;
    let start = Instant::now();
    let summary_path = ctx.resolve(&cfg.outputs.summary_path, format!("{}.summary.json", cfg.name));
    let trace_path = ctx.resolve(&cfg.outputs.trace_path, format!("{}.csv", cfg.name));
    let (mut summary, trace_path, breach) = match cfg.mode {
        Mode::Solve => run_solve(cfg, ctx, &inst, &trace_path)?,
        Mode::Dynamics => run_dynamics(cfg, &inst, &trace_path)?,
        Mode::Oracle => run_oracle(cfg, ctx, &inst)?,
        Mode::Compare => run_compare(cfg, &inst, &trace_path)?,
    };
    let obj = summary.as_object_mut().expect("summaries are objects");
    obj.insert("name".into(), json!(cfg.name));
    obj.insert("mode".into(), serde_json::to_value(cfg.mode)?);
    obj.insert("wall_time_s".into(), json!(start.elapsed().as_secs_f64()));
    if let Some(p) = &trace_path {
        obj.insert("trace_path".into(), json!(p.display().to_string()));
    }
    write_summary(&summary_path, &summary)?;
    if let Some(msg) = breach {
        return Err(Error::InvariantBreach(msg));
    }
    Ok(RunReport { summary, trace_path, summary_path })
}

type ModeOutput = (Value, Option<PathBuf>, Option<String>);

fn solve_options(cfg: &ExperimentConfig, inst: &Instance) -> SolveOptions {
    SolveOptions::new(cfg.max_iter).gap_tol(cfg.gap_tol).rule(inst.rule).gauss_seidel(cfg.gauss_seidel)
}

fn run_solve(cfg: &ExperimentConfig, ctx: &RunContext, inst: &Instance, path: &Path) -> Result<ModeOutput> {
    let schedule = cfg.schedule.build()?;
    let cached = ctx.cache.load(&oracle::instance_key(&cfg.instance()))?;
    let mut opts = solve_options(cfg, inst);
    if let Some(r) = &cached {
        opts = opts.oracle_solution(r.x_star.clone());
    }
    let trace = solver::solve(&inst.set, &inst.op, &schedule, &inst.x0, &opts)?;
    let mut w = create(path)?;
    trace.write_csv(&mut w)?;
    w.flush()?;

    let last = trace.last();
    let mut summary = json!({
        "schedule": schedule.label(),
        "iterations": trace.iterations,
        "stride": trace.stride,
        "final_gap": last.gap,
        "running_min_gap": trace.min_gap,
        "converged": trace.converged,
        "final_x": last.x.as_slice(),
        "dist_to_oracle": last.dist,
    });
    if cached.is_some() && !inst.op.is_strongly_monotone() {
        summary["dist_note"] =
            json!("distance to one oracle point; an upper bound on the distance to the solution set");
    }
    Ok((summary, Some(path.to_path_buf()), None))
}

fn run_dynamics(cfg: &ExperimentConfig, inst: &Instance, path: &Path) -> Result<ModeOutput> {
    let spec = cfg.dynamics.as_ref().ok_or_else(|| Error::Config {
        path: "dynamics".into(),
        message: "mode \"dynamics\" needs {\"h\": .., \"t_end\": ..}".into(),
    })?;
    let traj = dynamics::integrate_br(&inst.set, &inst.op, &inst.x0, spec.t_end, spec.h, inst.rule)?;
    let report = dynamics::decay_check(&traj, &inst.set, &inst.op, inst.rule)?;
    let mut w = create(path)?;
    traj.write_csv(&mut w, Some(&report.gaps))?;
    w.flush()?;

    let summary = json!({
        "h": spec.h,
        "t_end": traj.end(),
        "steps": traj.len() - 1,
        "initial_gap": report.gaps[0],
        "final_gap": report.gaps[report.gaps.len() - 1],
        "decay_tol": report.tol,
        "max_forward_increase": report.max_forward_increase,
        "step_violations": report.step_violations,
        "envelope_violations": report.envelope_violations,
        "decay_passed": report.passed(),
        "lipschitz_estimate": traj.lipschitz_estimate(1000, cfg.seed),
        "diameter": inst.set.diameter(),
    });
    let breach = (!report.passed()).then(|| {
        format!(
            "gap decay check failed: {} step and {} envelope violations at tol {:e}",
            report.step_violations, report.envelope_violations, report.tol
        )
    });
    Ok((summary, Some(path.to_path_buf()), breach))
}

fn oracle_options(cfg: &ExperimentConfig, inst: &Instance) -> ExtragradientOptions {
    ExtragradientOptions {
        eta: cfg.oracle.eta,
        tol: cfg.oracle.tol,
        max_iter: cfg.oracle.max_iter,
        rule: inst.rule,
    }
}

/// Cached oracle solution for the config's instance, computing and storing
/// it on a miss.
pub fn oracle_solution(cfg: &ExperimentConfig, ctx: &RunContext) -> Result<(OracleResult, bool)> {
    let inst = build(cfg)?;
    let key = oracle::instance_key(&cfg.instance());
    if let Some(r) = ctx.cache.load(&key)? {
        return Ok((r, true));
    }
    let r = oracle::extragradient(&inst.set, &inst.op, &inst.set.centroid(), &oracle_options(cfg, &inst))?;
    ctx.cache.store(&key, &r)?;
    Ok((r, false))
}

fn run_oracle(cfg: &ExperimentConfig, ctx: &RunContext, inst: &Instance) -> Result<ModeOutput> {
    let (r, cached) = oracle_solution(cfg, ctx)?;
    let gap = solver::fw_gap(&inst.set, &inst.op, &r.x_star, inst.rule)?.0;
    let mut breach = None;
    if !inst.set.contains(&r.x_star, FEAS_TOL)? {
        breach = Some("oracle solution lies outside the feasible set".to_string());
    } else if gap > cfg.oracle.tol {
        breach = Some(format!("oracle gap {gap:e} exceeds tol {:e}", cfg.oracle.tol));
    }
    let mut summary = json!({
        "x_star": r.x_star.as_slice(),
        "residual": gap,
        "iterations": r.iterations,
        "method": r.method,
        "from_cache": cached,
        "cache_key": oracle::instance_key(&cfg.instance()),
    });
    if inst.op.is_strongly_monotone() {
        let u = oracle::uniqueness_check(
            &inst.set,
            &inst.op,
            UNIQUENESS_TRIALS,
            cfg.seed,
            &oracle_options(cfg, inst),
        )?;
        summary["uniqueness_max_distance"] = json!(u.max_pairwise_distance);
        summary["uniqueness_passed"] = json!(u.passed());
        if breach.is_none() && !u.passed() {
            breach = Some(format!(
                "solutions from {UNIQUENESS_TRIALS} starts differ by {:e}",
                u.max_pairwise_distance
            ));
        }
    }
    Ok((summary, None, breach))
}

fn run_compare(cfg: &ExperimentConfig, inst: &Instance, path: &Path) -> Result<ModeOutput> {
    if cfg.schedules.is_empty() {
        return Err(Error::Config {
            path: "schedules".into(),
            message: "mode \"compare\" needs a non-empty list of schedules".into(),
        });
    }
    let schedules = cfg.schedules.iter().map(|s| s.build()).collect::<Result<Vec<_>>>()?;
    // equal row counts need every run to reach max_iter
    let opts = solve_options(cfg, inst).gap_tol(0.0);
    let traces: Vec<Result<SolverTrace>> = std::thread::scope(|scope| {
        let handles: Vec<_> = schedules
            .iter()
            .map(|s| scope.spawn(|| solver::solve(&inst.set, &inst.op, s, &inst.x0, &opts)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("solver thread panicked")).collect()
    });
    let traces = traces.into_iter().collect::<Result<Vec<_>>>()?;
    let mins: Vec<Vec<f64>> = traces.iter().map(SolverTrace::running_min_gap).collect();

    let mut w = create(path)?;
    write!(w, "k")?;
    for s in &schedules {
        write!(w, ",{}", s.label())?;
    }
    writeln!(w)?;
    for (i, row) in traces[0].rows.iter().enumerate() {
        write!(w, "{}", row.k)?;
        for m in &mins {
            write!(w, ",{}", fmt_f64(m[i]))?;
        }
        writeln!(w)?;
    }
    w.flush()?;

    let runs: Vec<Value> = schedules
        .iter()
        .zip(&traces)
        .map(|(s, t)| json!({ "schedule": s.label(), "final_gap": t.final_gap(), "running_min_gap": t.min_gap }))
        .collect();
    let summary = json!({ "iterations": cfg.max_iter, "rows": traces[0].rows.len(), "runs": runs });
    Ok((summary, Some(path.to_path_buf()), None))
}
