//! Reference solutions computed independently of the Frank-Wolfe loop.
//!
//! The extragradient method uses exact projections and a fixed step, so its
//! convergence mechanism shares nothing with the LMO-and-vanishing-step
//! iteration it is used to validate. The brute-force gap enumerates every
//! vertex instead of calling the LMO.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{check_dim, Error, Result};
use crate::operators::Operator;
use crate::sets::{FeasibleSet, TieRule};
use crate::solver::{self, FEAS_TOL};

/// Env var naming the directory of the oracle solution cache.
pub const CACHE_DIR_ENV: &str = "VIFW_CACHE_DIR";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMethod {
    /// The initial point already met the tolerance.
    Initial,
    ExtragradientLast,
    /// Running average of the extrapolated points; used for merely
    /// monotone operators when it certifies before the last iterate.
    ExtragradientErgodic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    pub x_star: DVector<f64>,
    /// Frank-Wolfe gap at `x_star`.
    pub residual: f64,
    pub iterations: usize,
    pub method: OracleMethod,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtragradientOptions {
    /// Step size; `None` picks `0.5 / ||J||` at the centroid.
    pub eta: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
    pub rule: TieRule,
}

impl Default for ExtragradientOptions {
    fn default() -> Self {
        Self { eta: None, tol: 1e-10, max_iter: 1_000_000, rule: TieRule::default() }
    }
}

impl ExtragradientOptions {
    pub fn tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn eta(mut self, eta: f64) -> Self {
        self.eta = Some(eta);
        self
    }
}

/// Spectral norm of `j` by power iteration on `j^T j`.
fn spectral_norm(j: &DMatrix<f64>) -> f64 {
    let n = j.ncols();
    let mut v = DVector::from_fn(n, |i, _| 1.0 + 0.1 * i as f64);
    v.normalize_mut();
    let jtj = j.transpose() * j;
    let mut est = 0.0;
    for _ in 0..200 {
        let w = &jtj * &v;
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        let next = norm.sqrt();
        v = w / norm;
        if (next - est).abs() <= 1e-12 * next {
            return next;
        }
        est = next;
    }
    est
}

/// Default extragradient step: `0.5 / L` with `L` a power-iteration estimate
/// of the Jacobian norm at the centroid of the set.
pub fn default_eta(set: &FeasibleSet, op: &Operator) -> Result<f64> {
    let j = op.jacobian_fd(&set.centroid(), 1e-5)?;
    let lip = spectral_norm(&j);
    Ok(if lip > 1e-12 { 0.5 / lip } else { 1.0 })
}

/// Extragradient: `y = P(x - eta F(x))`, `x+ = P(x - eta F(y))`, until the
/// Frank-Wolfe gap drops to `tol`.
pub fn extragradient(
    set: &FeasibleSet,
    op: &Operator,
    x0: &DVector<f64>,
    opts: &ExtragradientOptions,
) -> Result<OracleResult> {
    check_dim(set.dim(), op.dim())?;
    check_dim(set.dim(), x0.len())?;
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tol must be positive, got {}", opts.tol)));
    }
    let eta = match opts.eta {
        Some(e) if e > 0.0 && e.is_finite() => e,
        Some(e) => return Err(Error::InvalidArgument(format!("eta must be positive, got {e}"))),
        None => default_eta(set, op)?,
    };
    let rule = opts.rule;
    let (gap0, _) = solver::fw_gap(set, op, x0, rule)?;
    if gap0 <= opts.tol {
        return Ok(OracleResult {
            x_star: x0.clone(),
            residual: gap0,
            iterations: 0,
            method: OracleMethod::Initial,
        });
    }

    let ergodic = !op.is_strongly_monotone();
    let mut x = x0.clone();
    let mut y_sum = DVector::zeros(x.len());
    let mut best = gap0;
    for it in 1..=opts.max_iter {
        let y = set.project(&(&x - op.evaluate(&x)? * eta))?;
        x = set.project(&(&x - op.evaluate(&y)? * eta))?;
        let gap = solver::gap_at(set, op, &x, rule);
        best = best.min(gap);
        if gap <= opts.tol {
            return Ok(OracleResult {
                x_star: x,
                residual: gap,
                iterations: it,
                method: OracleMethod::ExtragradientLast,
            });
        }
        if ergodic {
            y_sum += &y;
            let avg = &y_sum / it as f64;
            let gap = solver::gap_at(set, op, &avg, rule);
            best = best.min(gap);
            if gap <= opts.tol {
                return Ok(OracleResult {
                    x_star: avg,
                    residual: gap,
                    iterations: it,
                    method: OracleMethod::ExtragradientErgodic,
                });
            }
        }
    }
    Err(Error::OracleNotConverged { iterations: opts.max_iter, tol: opts.tol, best })
}

/// `max_v <F(x), x - v>` over every canonical vertex `v` of the set.
pub fn brute_force_gap(set: &FeasibleSet, op: &Operator, x: &DVector<f64>) -> Result<f64> {
    check_dim(set.dim(), op.dim())?;
    let f = op.evaluate(x)?;
    let fx = f.dot(x);
    Ok(set.vertices()?.iter().map(|v| fx - f.dot(v)).fold(f64::NEG_INFINITY, f64::max))
}

#[derive(Clone, Debug, PartialEq)]
pub struct UniquenessReport {
    pub solutions: Vec<DVector<f64>>,
    pub max_pairwise_distance: f64,
    /// Threshold `10 tol` on the pairwise distances.
    pub threshold: f64,
    /// `2 sqrt(tol / mu)`: any two points with gap `<= tol` are this close,
    /// since `mu ||x - x*||^2 <= V(x)`.
    pub certified_radius: f64,
}

impl UniquenessReport {
    pub fn passed(&self) -> bool {
        self.max_pairwise_distance <= self.threshold
    }
}

/// Runs extragradient from `trials` random starts of a strongly monotone
/// problem and measures how far apart the returned solutions are.
pub fn uniqueness_check(
    set: &FeasibleSet,
    op: &Operator,
    trials: usize,
    seed: u64,
    opts: &ExtragradientOptions,
) -> Result<UniquenessReport> {
    if !op.is_strongly_monotone() {
        return Err(Error::NotStronglyMonotone(op.mu()));
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let solutions = (0..trials)
        .map(|_| {
            let start = set.sample(&mut rng);
            extragradient(set, op, &start, opts).map(|r| r.x_star)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut max_d = 0.0_f64;
    for (i, a) in solutions.iter().enumerate() {
        for b in &solutions[i + 1..] {
            max_d = max_d.max((a - b).norm());
        }
    }
    Ok(UniquenessReport {
        solutions,
        max_pairwise_distance: max_d,
        threshold: 10.0 * opts.tol,
        certified_radius: 2.0 * (opts.tol / op.mu()).sqrt(),
    })
}

/// Solves from the centroid with default options.
pub fn solve_reference(set: &FeasibleSet, op: &Operator, tol: f64) -> Result<OracleResult> {
    let opts = ExtragradientOptions::default().tol(tol);
    extragradient(set, op, &set.centroid(), &opts)
}

/// SHA-256 hex digest of the canonical JSON of an instance description.
pub fn instance_key(instance: &serde_json::Value) -> String {
    let text = serde_json::to_string(instance).unwrap_or_default();
    hex::encode(Sha256::digest(text.as_bytes()))
}

#[derive(Serialize, Deserialize)]
struct CachedSolution {
    key: String,
    x_star: Vec<f64>,
    residual: f64,
    iterations: usize,
    method: OracleMethod,
}

/// JSON sidecar files `<dir>/<key>.json` holding oracle solutions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleCache {
    dir: PathBuf,
}

impl OracleCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    /// `$VIFW_CACHE_DIR`, or `.vifw-cache` in the working directory.
    pub fn from_env() -> Self {
        let dir = std::env::var_os(CACHE_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(".vifw-cache"));
        Self::new(dir)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    pub fn load(&self, key: &str) -> Result<Option<OracleResult>> {
        let path = self.path(key);
        if !path.exists() {
            return Ok(None);
        }
        let cached: CachedSolution = serde_json::from_str(&fs::read_to_string(path)?)?;
        if cached.key != key {
            return Ok(None);
        }
        Ok(Some(OracleResult {
            x_star: DVector::from_vec(cached.x_star),
            residual: cached.residual,
            iterations: cached.iterations,
            method: cached.method,
        }))
    }

    pub fn store(&self, key: &str, result: &OracleResult) -> Result<PathBuf> {
        fs::create_dir_all(&self.dir)?;
        let cached = CachedSolution {
            key: key.to_string(),
            x_star: result.x_star.iter().copied().collect(),
            residual: result.residual,
            iterations: result.iterations,
            method: result.method,
        };
        let path = self.path(key);
        fs::write(&path, serde_json::to_string_pretty(&cached)?)?;
        Ok(path)
    }
}

/// Whether `x` is an acceptable oracle point for the set.
pub fn is_feasible(set: &FeasibleSet, x: &DVector<f64>) -> Result<bool> {
    set.contains(x, FEAS_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::{dmatrix, dvector};

    fn unit_box(n: usize) -> FeasibleSet {
        FeasibleSet::box_set(DVector::zeros(n), DVector::from_element(n, 1.0)).unwrap()
    }

    #[test]
    fn box_solution_is_clamped_target() {
        // F(x) = x - b, so x* = clamp(b)
        let b = dvector![0.3, 1.7, -0.4];
        let op = Operator::affine(DMatrix::identity(3, 3), -b.clone(), 1.0).unwrap();
        let set = unit_box(3);
        let r = solve_reference(&set, &op, 1e-10).unwrap();
        assert!(r.residual <= 1e-10);
        assert_abs_diff_eq!(r.x_star, dvector![0.3, 1.0, 0.0], epsilon = 1e-8);
    }

    #[test]
    fn identity_game_oracle_is_uniform() {
        let set =
            FeasibleSet::product(vec![FeasibleSet::simplex(2).unwrap(), FeasibleSet::simplex(2).unwrap()])
                .unwrap();
        let op = Operator::fictitious_play(DMatrix::identity(2, 2)).unwrap();
        let x0 = dvector![1.0, 0.0, 0.0, 1.0];
        let r = extragradient(&set, &op, &x0, &ExtragradientOptions::default()).unwrap();
        assert!(r.residual <= 1e-10);
        assert_abs_diff_eq!(r.x_star, dvector![0.5, 0.5, 0.5, 0.5], epsilon = 1e-8);
        let (gap, _) = solver::fw_gap(&set, &op, &r.x_star, TieRule::default()).unwrap();
        assert!(gap <= 1e-10);
    }

    #[test]
    fn solution_start_returns_immediately() {
        let op = Operator::affine(DMatrix::identity(2, 2), dvector![-0.5, -0.5], 1.0).unwrap();
        let r =
            extragradient(&unit_box(2), &op, &dvector![0.5, 0.5], &ExtragradientOptions::default()).unwrap();
        assert_eq!(r.iterations, 0);
        assert_eq!(r.method, OracleMethod::Initial);
    }

    #[test]
    fn gives_up_at_max_iter() {
        let op = Operator::affine(DMatrix::identity(2, 2), dvector![-0.5, -0.5], 1.0).unwrap();
        let opts = ExtragradientOptions::default().max_iter(2).eta(1e-6);
        let r = extragradient(&unit_box(2), &op, &dvector![0.0, 0.0], &opts);
        assert!(matches!(r, Err(Error::OracleNotConverged { iterations: 2, .. })));
    }

    #[test]
    fn brute_force_identity_game_vertex_pair() {
        let set =
            FeasibleSet::product(vec![FeasibleSet::simplex(2).unwrap(), FeasibleSet::simplex(2).unwrap()])
                .unwrap();
        let op = Operator::fictitious_play(DMatrix::identity(2, 2)).unwrap();
        assert_eq!(brute_force_gap(&set, &op, &dvector![1.0, 0.0, 1.0, 0.0]).unwrap(), 1.0);
        let big = unit_box(21);
        let op = Operator::affine(DMatrix::identity(21, 21), DVector::zeros(21), 1.0).unwrap();
        assert!(matches!(
            brute_force_gap(&big, &op, &DVector::zeros(21)),
            Err(Error::TooManyVertices { .. })
        ));
    }

    #[test]
    fn uniqueness_requires_strong_monotonicity() {
        let set = unit_box(2);
        let skew = Operator::affine(dmatrix![0.0, 1.0; -1.0, 0.0], DVector::zeros(2), 0.0).unwrap();
        let opts = ExtragradientOptions::default();
        assert!(matches!(uniqueness_check(&set, &skew, 3, 1, &opts), Err(Error::NotStronglyMonotone(_))));
        let op = Operator::affine(DMatrix::identity(2, 2) * 2.0, dvector![-0.4, 0.3], 2.0).unwrap();
        let one = uniqueness_check(&set, &op, 1, 1, &opts).unwrap();
        assert_eq!(one.max_pairwise_distance, 0.0);
        assert!(one.passed());
    }

    #[test]
    fn spectral_norm_of_diagonal() {
        let j = DMatrix::from_diagonal(&dvector![3.0, -5.0, 1.0]);
        assert_abs_diff_eq!(spectral_norm(&j), 5.0, epsilon = 1e-9);
    }

    #[test]
    fn cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cache = OracleCache::new(dir.path().join("nested"));
        let key = instance_key(&serde_json::json!({"set": {"type": "simplex", "n": 2}}));
        assert_eq!(key.len(), 64);
        assert!(cache.load(&key).unwrap().is_none());
        let r = OracleResult {
            x_star: dvector![0.25, 0.75],
            residual: 1e-12,
            iterations: 7,
            method: OracleMethod::ExtragradientLast,
        };
        cache.store(&key, &r).unwrap();
        assert_eq!(cache.load(&key).unwrap().unwrap(), r);
    }
}
