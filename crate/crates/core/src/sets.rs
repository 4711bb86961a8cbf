//! Compact convex feasible sets.
//!
//! Each set exposes a linear minimization oracle (LMO), a Euclidean
//! projection, its exact diameter, and a tolerance-based membership test.
//! Sets are immutable once built; every constructor validates its input.
//!
//! Vertices are enumerated in a fixed canonical order which the tie rules
//! and the `"vertex:i"` start of the experiment configs refer to:
//!
//! * `Simplex(n)`: the unit vectors `e_0, ..., e_{n-1}`.
//! * `Box`: corner `i` takes the upper bound on coordinate `j` iff bit `j`
//!   of `i` is set, so corner 0 is `lower`.
//! * `VertexPolytope`: the points in the order they were given.
//! * `Product`: mixed radix over the factors, first factor fastest.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{check_dim, check_finite, Error, Result};

/// Relative gap under which two LMO candidates count as tied for
/// [`TieRule::LexicographicMin`].
const TIE_RTOL: f64 = 16.0 * f64::EPSILON;

/// Largest vertex set that [`FeasibleSet::vertices`] will materialize.
pub const MAX_VERTICES: usize = 1_000_000;

/// Selection rule for the set-valued argmin of the LMO.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum TieRule {
    /// Candidates whose objective values agree up to a few ulps are tied,
    /// and the one with the smallest canonical index wins (the classical
    /// "lowest action first" rule of fictitious play).
    #[default]
    LexicographicMin,
    /// Exact floating point comparison; the first candidate in canonical
    /// order attaining the exact minimum wins. Rounding noise can decide
    /// near-ties.
    FirstVertex,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SetKind {
    Simplex(usize),
    Box { lower: DVector<f64>, upper: DVector<f64> },
    VertexPolytope(Vec<DVector<f64>>),
    Product(Vec<FeasibleSet>),
}

/// A nonempty compact convex subset of R^n.
#[derive(Clone, Debug, PartialEq)]
pub struct FeasibleSet {
    dim: usize,
    kind: SetKind,
}

impl FeasibleSet {
    /// The probability simplex `{x >= 0, sum x = 1}` in R^n.
    pub fn simplex(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSet("simplex dimension must be positive".into()));
        }
        Ok(Self { dim: n, kind: SetKind::Simplex(n) })
    }

    /// The box `lower <= x <= upper`.
    pub fn box_set(lower: DVector<f64>, upper: DVector<f64>) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::InvalidSet("box dimension must be positive".into()));
        }
        check_dim(lower.len(), upper.len())?;
        check_finite("box bounds", lower.as_slice())?;
        check_finite("box bounds", upper.as_slice())?;
        if let Some(j) = (0..lower.len()).find(|&j| lower[j] > upper[j]) {
            return Err(Error::InvalidSet(format!("box lower bound exceeds upper bound at coordinate {j}")));
        }
        Ok(Self { dim: lower.len(), kind: SetKind::Box { lower, upper } })
    }

    /// The convex hull of a finite point list.
    pub fn vertex_polytope(points: Vec<DVector<f64>>) -> Result<Self> {
        let first = points
            .first()
            .ok_or_else(|| Error::InvalidSet("vertex polytope needs at least one vertex".into()))?;
        let dim = first.len();
        if dim == 0 {
            return Err(Error::InvalidSet("vertex dimension must be positive".into()));
        }
        for p in &points {
            check_dim(dim, p.len())?;
            check_finite("polytope vertex", p.as_slice())?;
        }
        Ok(Self { dim, kind: SetKind::VertexPolytope(points) })
    }

    /// Cartesian product of the factors, coordinates concatenated in order.
    pub fn product(factors: Vec<FeasibleSet>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidSet("product needs at least one factor".into()));
        }
        let dim = factors.iter().map(|f| f.dim).sum();
        Ok(Self { dim, kind: SetKind::Product(factors) })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &SetKind {
        &self.kind
    }

    /// Coordinate ranges of the factors of a product set; a single range
    /// covering everything for other variants.
    pub fn blocks(&self) -> Vec<(std::ops::Range<usize>, &FeasibleSet)> {
        match &self.kind {
            SetKind::Product(factors) => {
                let mut offset = 0;
                factors
                    .iter()
                    .map(|f| {
                        let r = offset..offset + f.dim;
                        offset += f.dim;
                        (r, f)
                    })
                    .collect()
            }
            _ => vec![(0..self.dim, self)],
        }
    }

    /// Linear minimization oracle: a minimizer of `<pi, s>` over the set,
    /// selected by `rule` when the argmin is not a singleton.
    pub fn lmo(&self, pi: &DVector<f64>, rule: TieRule) -> Result<DVector<f64>> {
        check_dim(self.dim, pi.len())?;
        check_finite("lmo direction", pi.as_slice())?;
        let mut out = DVector::zeros(self.dim);
        self.lmo_into(pi.as_slice(), rule, out.as_mut_slice());
        Ok(out)
    }

    pub(crate) fn lmo_into(&self, pi: &[f64], rule: TieRule, out: &mut [f64]) {
        match &self.kind {
            SetKind::Simplex(_) => {
                let i = select_min(pi.iter().copied(), rule);
                out.fill(0.0);
                out[i] = 1.0;
            }
            SetKind::Box { lower, upper } => {
                let scale = pi.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
                for j in 0..pi.len() {
                    let take_upper = match rule {
                        TieRule::LexicographicMin => pi[j] < -TIE_RTOL * scale,
                        TieRule::FirstVertex => pi[j] < 0.0,
                    };
                    out[j] = if take_upper { upper[j] } else { lower[j] };
                }
            }
            SetKind::VertexPolytope(points) => {
                let values = points.iter().map(|p| dot(pi, p.as_slice()));
                let i = select_min(values, rule);
                out.copy_from_slice(points[i].as_slice());
            }
            SetKind::Product(factors) => {
                let mut offset = 0;
                for f in factors {
                    let r = offset..offset + f.dim;
                    f.lmo_into(&pi[r.clone()], rule, &mut out[r]);
                    offset += f.dim;
                }
            }
        }
    }

    /// Euclidean projection onto the set.
    pub fn project(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.dim, x.len())?;
        check_finite("projection input", x.as_slice())?;
        let mut out = DVector::zeros(self.dim);
        self.project_into(x.as_slice(), out.as_mut_slice());
        Ok(out)
    }

    fn project_into(&self, x: &[f64], out: &mut [f64]) {
        match &self.kind {
            SetKind::Simplex(_) => project_simplex(x, out),
            SetKind::Box { lower, upper } => {
                for j in 0..x.len() {
                    out[j] = x[j].clamp(lower[j], upper[j]);
                }
            }
            SetKind::VertexPolytope(points) => {
                let p = nearest_in_hull(points, x);
                out.copy_from_slice(p.as_slice());
            }
            SetKind::Product(factors) => {
                let mut offset = 0;
                for f in factors {
                    let r = offset..offset + f.dim;
                    f.project_into(&x[r.clone()], &mut out[r]);
                    offset += f.dim;
                }
            }
        }
    }

    /// Exact diameter `max ||u - v||` over the set.
    pub fn diameter(&self) -> f64 {
        match &self.kind {
            SetKind::Simplex(n) => {
                if *n >= 2 {
                    std::f64::consts::SQRT_2
                } else {
                    0.0
                }
            }
            SetKind::Box { lower, upper } => (upper - lower).norm(),
            SetKind::VertexPolytope(points) => {
                let mut best = 0.0_f64;
                for (i, p) in points.iter().enumerate() {
                    for q in &points[i + 1..] {
                        best = best.max((p - q).norm());
                    }
                }
                best
            }
            SetKind::Product(factors) => factors.iter().map(|f| f.diameter().powi(2)).sum::<f64>().sqrt(),
        }
    }

    /// Constraint violation of `x` in the infinity norm. Zero on the set.
    /// For a vertex polytope this is the projection distance.
    pub fn residual(&self, x: &DVector<f64>) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        Ok(self.residual_of(x.as_slice()))
    }

    fn residual_of(&self, x: &[f64]) -> f64 {
        match &self.kind {
            SetKind::Simplex(_) => {
                let neg = x.iter().fold(0.0_f64, |m, &v| m.max(-v));
                let sum: f64 = x.iter().sum();
                neg.max((sum - 1.0).abs())
            }
            SetKind::Box { lower, upper } => {
                (0..x.len()).fold(0.0_f64, |m, j| m.max(lower[j] - x[j]).max(x[j] - upper[j]))
            }
            SetKind::VertexPolytope(points) => {
                let p = nearest_in_hull(points, x);
                p.iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
            }
            SetKind::Product(factors) => {
                let mut offset = 0;
                let mut worst = 0.0_f64;
                for f in factors {
                    worst = worst.max(f.residual_of(&x[offset..offset + f.dim]));
                    offset += f.dim;
                }
                worst
            }
        }
    }

    /// Whether `x` satisfies the defining constraints up to `tol`.
    pub fn contains(&self, x: &DVector<f64>, tol: f64) -> Result<bool> {
        if !(tol >= 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance must be >= 0, got {tol}")));
        }
        let r = self.residual(x)?;
        Ok(r.is_finite() && r <= tol)
    }

    /// Number of canonical vertices, or `None` on overflow.
    pub fn vertex_count(&self) -> Option<usize> {
        match &self.kind {
            SetKind::Simplex(n) => Some(*n),
            SetKind::Box { .. } => 2usize.checked_pow(u32::try_from(self.dim).ok()?),
            SetKind::VertexPolytope(points) => Some(points.len()),
            SetKind::Product(factors) => {
                factors.iter().try_fold(1usize, |acc, f| acc.checked_mul(f.vertex_count()?))
            }
        }
    }

    /// The `i`-th canonical vertex.
    pub fn vertex(&self, i: usize) -> Result<DVector<f64>> {
        let count = self.vertex_count();
        if count.is_some_and(|c| i >= c) {
            return Err(Error::InvalidArgument(format!(
                "vertex index {i} out of range ({} vertices)",
                count.unwrap_or(0)
            )));
        }
        let mut out = DVector::zeros(self.dim);
        self.vertex_into(i, out.as_mut_slice());
        Ok(out)
    }

    fn vertex_into(&self, i: usize, out: &mut [f64]) {
        match &self.kind {
            SetKind::Simplex(_) => {
                out.fill(0.0);
                out[i] = 1.0;
            }
            SetKind::Box { lower, upper } => {
                for j in 0..out.len() {
                    let bit = j < usize::BITS as usize && (i >> j) & 1 == 1;
                    out[j] = if bit { upper[j] } else { lower[j] };
                }
            }
            SetKind::VertexPolytope(points) => out.copy_from_slice(points[i].as_slice()),
            SetKind::Product(factors) => {
                let mut rest = i;
                let mut offset = 0;
                for f in factors {
                    // vertex_count is Some here: the caller's index fit
                    let c = f.vertex_count().unwrap_or(usize::MAX);
                    f.vertex_into(rest % c, &mut out[offset..offset + f.dim]);
                    rest /= c;
                    offset += f.dim;
                }
            }
        }
    }

    /// All canonical vertices. Rejects sets with more than [`MAX_VERTICES`].
    pub fn vertices(&self) -> Result<Vec<DVector<f64>>> {
        let count = match self.vertex_count() {
            Some(c) if c <= MAX_VERTICES => c,
            Some(c) => return Err(Error::TooManyVertices { count: c as f64 }),
            None => return Err(Error::TooManyVertices { count: f64::INFINITY }),
        };
        (0..count).map(|i| self.vertex(i)).collect()
    }

    /// Barycenter of the canonical vertices.
    pub fn centroid(&self) -> DVector<f64> {
        match &self.kind {
            SetKind::Simplex(n) => DVector::from_element(*n, 1.0 / *n as f64),
            SetKind::Box { lower, upper } => (lower + upper) * 0.5,
            SetKind::VertexPolytope(points) => {
                let sum = points.iter().fold(DVector::zeros(self.dim), |acc, p| acc + p);
                sum / points.len() as f64
            }
            SetKind::Product(factors) => DVector::from_iterator(
                self.dim,
                factors.iter().flat_map(|f| f.centroid().data.as_vec().clone()),
            ),
        }
    }

    /// Componentwise bounding box `(lo, hi)`.
    pub fn bounding_box(&self) -> (DVector<f64>, DVector<f64>) {
        match &self.kind {
            SetKind::Simplex(n) => (DVector::zeros(*n), DVector::from_element(*n, 1.0)),
            SetKind::Box { lower, upper } => (lower.clone(), upper.clone()),
            SetKind::VertexPolytope(points) => {
                let mut lo = points[0].clone();
                let mut hi = points[0].clone();
                for p in points {
                    lo = lo.inf(p);
                    hi = hi.sup(p);
                }
                (lo, hi)
            }
            SetKind::Product(factors) => {
                let (mut lo, mut hi) = (Vec::with_capacity(self.dim), Vec::with_capacity(self.dim));
                for f in factors {
                    let (l, h) = f.bounding_box();
                    lo.extend(l.iter());
                    hi.extend(h.iter());
                }
                (DVector::from_vec(lo), DVector::from_vec(hi))
            }
        }
    }

    /// A random point of the set. Simplex and polytope points are drawn as
    /// random convex combinations of the vertices; boxes uniformly.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        match &self.kind {
            SetKind::Simplex(n) => DVector::from_vec(random_weights(rng, *n)),
            SetKind::Box { lower, upper } => DVector::from_iterator(
                self.dim,
                (0..self.dim).map(|j| lower[j] + rng.gen::<f64>() * (upper[j] - lower[j])),
            ),
            SetKind::VertexPolytope(points) => {
                let w = random_weights(rng, points.len());
                points.iter().zip(w).fold(DVector::zeros(self.dim), |acc, (p, wi)| acc + p * wi)
            }
            SetKind::Product(factors) => {
                let mut v = Vec::with_capacity(self.dim);
                for f in factors {
                    v.extend(f.sample(rng).iter());
                }
                DVector::from_vec(v)
            }
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn random_weights<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    // normalized exponentials: uniform on the simplex
    let mut w: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let total: f64 = w.iter().sum();
    if total > 0.0 {
        w.iter_mut().for_each(|v| *v /= total);
    } else {
        w.fill(1.0 / n as f64);
    }
    w
}

fn select_min(values: impl Iterator<Item = f64> + Clone, rule: TieRule) -> usize {
    let mut best = 0;
    let mut best_val = f64::INFINITY;
    for (i, v) in values.clone().enumerate() {
        if v < best_val {
            best = i;
            best_val = v;
        }
    }
    match rule {
        TieRule::FirstVertex => best,
        TieRule::LexicographicMin => {
            let scale = values.clone().fold(0.0_f64, |m, v| m.max(v.abs()));
            let cutoff = best_val + TIE_RTOL * scale;
            values.enumerate().find(|&(_, v)| v <= cutoff).map_or(best, |(i, _)| i)
        }
    }
}

/// Sort-and-threshold projection onto the probability simplex.
fn project_simplex(x: &[f64], out: &mut [f64]) {
    let mut sorted = x.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut tau = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let t = (cumsum - 1.0) / (j + 1) as f64;
        if u - t > 0.0 {
            tau = t;
        }
    }
    for (o, &v) in out.iter_mut().zip(x) {
        *o = (v - tau).max(0.0);
    }
}

/// Nearest point to `x` in the convex hull of `points` (Wolfe's minimum
/// norm point algorithm applied to the shifted points `p - x`).
fn nearest_in_hull(points: &[DVector<f64>], x: &[f64]) -> DVector<f64> {
    const ZERO_WEIGHT: f64 = 1e-14;
    let n = x.len();
    let shifted: Vec<DVector<f64>> =
        points.iter().map(|p| DVector::from_iterator(n, p.iter().zip(x).map(|(a, b)| a - b))).collect();
    let scale = shifted.iter().fold(1.0_f64, |m, q| m.max(q.norm_squared()));
    let stop = 1e-12 * scale;

    let start = (0..shifted.len())
        .min_by(|&a, &b| shifted[a].norm_squared().total_cmp(&shifted[b].norm_squared()))
        .unwrap_or(0);
    let mut corral = vec![start];
    let mut weights = vec![1.0];
    let mut y = shifted[start].clone();

    let max_major = 100 + 10 * shifted.len();
    for _ in 0..max_major {
        let (j, best) = shifted
            .iter()
            .enumerate()
            .map(|(i, q)| (i, y.dot(q)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap_or((start, 0.0));
        if y.norm_squared() - best <= stop || corral.contains(&j) {
            break;
        }
        corral.push(j);
        weights.push(0.0);

        loop {
            let alpha = affine_minimizer(&shifted, &corral);
            if alpha.iter().all(|&a| a > ZERO_WEIGHT) {
                weights = alpha;
                break;
            }
            let mut theta = 1.0_f64;
            for (&l, &a) in weights.iter().zip(&alpha) {
                if a <= ZERO_WEIGHT {
                    let t = if l - a > 0.0 { l / (l - a) } else { 0.0 };
                    theta = theta.min(t);
                }
            }
            for (l, a) in weights.iter_mut().zip(&alpha) {
                *l = (1.0 - theta) * *l + theta * a;
            }
            let mut k = 0;
            while k < corral.len() {
                if weights[k] <= ZERO_WEIGHT && corral.len() > 1 {
                    corral.remove(k);
                    weights.remove(k);
                } else {
                    k += 1;
                }
            }
            let total: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= total);
            if corral.len() == 1 {
                weights[0] = 1.0;
                break;
            }
        }
        y = combine(&shifted, &corral, &weights, n);
    }

    let total: f64 = weights.iter().sum();
    let mut p = combine(points, &corral, &weights, n);
    p /= total;
    p
}

fn combine(points: &[DVector<f64>], idx: &[usize], w: &[f64], n: usize) -> DVector<f64> {
    idx.iter().zip(w).fold(DVector::zeros(n), |acc, (&i, &wi)| acc + &points[i] * wi)
}

/// Affine weights (summing to one) minimizing `||sum_i a_i q_i||` over the
/// corral, via least squares on the differences `q_i - q_0`.
fn affine_minimizer(q: &[DVector<f64>], corral: &[usize]) -> Vec<f64> {
    let k = corral.len();
    if k == 1 {
        return vec![1.0];
    }
    let base = &q[corral[0]];
    let n = base.len();
    let mut d = DMatrix::zeros(n, k - 1);
    for (c, &i) in corral[1..].iter().enumerate() {
        d.set_column(c, &(&q[i] - base));
    }
    let rhs = -base;
    let beta = d.svd(true, true).solve(&rhs, 1e-13).unwrap_or_else(|_| DVector::zeros(k - 1));
    let mut alpha = Vec::with_capacity(k);
    alpha.push(1.0 - beta.sum());
    alpha.extend(beta.iter());
    alpha
}
