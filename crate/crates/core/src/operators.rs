//! Monotone affine operators `F : R^n -> R^n`.
//!
//! Every shipped variant is affine, so `F` is total on R^n and `C^1`. The
//! strong monotonicity modulus `mu` is fixed at construction and verified
//! against the symmetric part of the Jacobian, so callers can dispatch on
//! "monotone" versus "strongly monotone" without estimating anything.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_dim, check_finite, Error, Result};
use crate::sets::FeasibleSet;

/// Tolerance of the eigenvalue checks behind the declared modulus.
pub const PSD_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub enum OperatorKind {
    /// `F(z) = M z + q`.
    Affine { m: DMatrix<f64>, q: DVector<f64> },
    /// Zero-sum matrix game with payoff `A` (n x m): `F(x, y) = (-A y, A^T x)`.
    FictitiousPlay { a: DMatrix<f64> },
    /// LP Lagrangian saddle with `A` (m x n): `F(x, y) = (c - A^T y, A x - b)`.
    LpSaddle { a: DMatrix<f64>, b: DVector<f64>, c: DVector<f64> },
    /// Saddle gradient `(grad_x L, -grad_y L)` of
    /// `L(x, y) = x'Qx x/2 + x'B y - y'Qy y/2 + <q, (x, -y)>`, i.e.
    /// `F(x, y) = (Qx x + B y + q_x, -B'x + Qy y + q_y)`.
    SaddleQuadratic { qx: DMatrix<f64>, qy: DMatrix<f64>, b: DMatrix<f64>, q: DVector<f64> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    dim: usize,
    mu: f64,
    kind: OperatorKind,
}

/// Outcome of sampling the (strong) monotonicity inequality.
#[derive(Clone, Debug, PartialEq)]
pub struct MonotonicityReport {
    pub trials: usize,
    pub mu: f64,
    /// Smallest observed `<F(x) - F(y), x - y> / ||x - y||^2`.
    pub min_ratio: f64,
    /// Pairs with `ratio < mu - 1e-10`.
    pub violations: usize,
}

impl MonotonicityReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

fn min_eigenvalue(sym: &DMatrix<f64>) -> f64 {
    if sym.is_empty() {
        return f64::INFINITY;
    }
    SymmetricEigen::new(sym.clone()).eigenvalues.min()
}

fn symmetric_part(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Largest `mu` with `<M z, z> >= mu ||z||^2`, i.e. the smallest eigenvalue
/// of `(M + M^T) / 2`. Negative for non-monotone `M`.
pub fn monotonicity_modulus(m: &DMatrix<f64>) -> f64 {
    min_eigenvalue(&symmetric_part(m))
}

fn check_matrix(what: &str, m: &DMatrix<f64>) -> Result<()> {
    check_finite(what, m.as_slice())
}

impl Operator {
    /// `F(z) = M z + q` with declared modulus `mu >= 0`.
    pub fn affine(m: DMatrix<f64>, q: DVector<f64>, mu: f64) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::InvalidOperator("affine matrix must be square and nonempty".into()));
        }
        check_dim(m.nrows(), q.len())?;
        check_matrix("affine matrix", &m)?;
        check_finite("affine offset", q.as_slice())?;
        if !(mu >= 0.0) {
            return Err(Error::InvalidOperator(format!("mu must be >= 0, got {mu}")));
        }
        let lambda = monotonicity_modulus(&m);
        if lambda < mu - PSD_TOL {
            return Err(Error::InvalidOperator(format!(
                "declared mu = {mu} exceeds lambda_min((M + M^T)/2) = {lambda}"
            )));
        }
        Ok(Self { dim: m.nrows(), mu, kind: OperatorKind::Affine { m, q } })
    }

    /// Affine operator with the largest verified modulus, `max(0, lambda_min)`.
    /// Rejects non-monotone `M`.
    pub fn affine_auto(m: DMatrix<f64>, q: DVector<f64>) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::InvalidOperator("affine matrix must be square and nonempty".into()));
        }
        let lambda = monotonicity_modulus(&m);
        let mu = if lambda.abs() <= PSD_TOL { 0.0 } else { lambda };
        if mu < 0.0 {
            return Err(Error::InvalidOperator(format!(
                "matrix is not monotone: lambda_min((M + M^T)/2) = {lambda}"
            )));
        }
        Self::affine(m, q, mu)
    }

    /// The fictitious play field of the zero-sum game with payoff `a`.
    pub fn fictitious_play(a: DMatrix<f64>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::InvalidOperator("payoff matrix must be nonempty".into()));
        }
        check_matrix("payoff matrix", &a)?;
        Ok(Self { dim: a.nrows() + a.ncols(), mu: 0.0, kind: OperatorKind::FictitiousPlay { a } })
    }

    /// The LP saddle operator for `min c'x s.t. A x = b`-type Lagrangians;
    /// `a` is m x n, `b` has length m and `c` length n.
    pub fn lp_saddle(a: DMatrix<f64>, b: DVector<f64>, c: DVector<f64>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::InvalidOperator("constraint matrix must be nonempty".into()));
        }
        check_dim(a.nrows(), b.len())?;
        check_dim(a.ncols(), c.len())?;
        check_matrix("constraint matrix", &a)?;
        check_finite("b", b.as_slice())?;
        check_finite("c", c.as_slice())?;
        Ok(Self { dim: a.nrows() + a.ncols(), mu: 0.0, kind: OperatorKind::LpSaddle { a, b, c } })
    }

    /// Saddle gradient of a convex-concave quadratic. `qx` (n x n) and `qy`
    /// (m x m) must be symmetric PSD; `b` is n x m; `q` has length n + m.
    /// The modulus is `min(lambda_min(qx), lambda_min(qy))`.
    pub fn saddle_quadratic(
        qx: DMatrix<f64>,
        qy: DMatrix<f64>,
        b: DMatrix<f64>,
        q: DVector<f64>,
    ) -> Result<Self> {
        let (n, m) = (qx.nrows(), qy.nrows());
        if !qx.is_square() || !qy.is_square() || n == 0 || m == 0 {
            return Err(Error::InvalidOperator("Qx and Qy must be square and nonempty".into()));
        }
        if b.shape() != (n, m) {
            return Err(Error::InvalidOperator(format!(
                "coupling matrix must be {n}x{m}, got {}x{}",
                b.nrows(),
                b.ncols()
            )));
        }
        check_dim(n + m, q.len())?;
        for (name, mat) in [("Qx", &qx), ("Qy", &qy), ("B", &b)] {
            check_matrix(name, mat)?;
        }
        check_finite("q", q.as_slice())?;
        for (name, mat) in [("Qx", &qx), ("Qy", &qy)] {
            let asym = (mat - mat.transpose()).abs().max();
            if asym > PSD_TOL * (1.0 + mat.abs().max()) {
                return Err(Error::InvalidOperator(format!("{name} is not symmetric")));
            }
        }
        let lambda = min_eigenvalue(&symmetric_part(&qx)).min(min_eigenvalue(&symmetric_part(&qy)));
        if lambda < -PSD_TOL {
            return Err(Error::InvalidOperator(format!(
                "Qx and Qy must be PSD, smallest eigenvalue {lambda}"
            )));
        }
        Ok(Self { dim: n + m, mu: lambda.max(0.0), kind: OperatorKind::SaddleQuadratic { qx, qy, b, q } })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Strong monotonicity modulus; 0 for merely monotone operators.
    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn is_strongly_monotone(&self) -> bool {
        self.mu > 0.0
    }

    pub fn kind(&self) -> &OperatorKind {
        &self.kind
    }

    /// `c * F` for `c > 0`; the modulus scales with it.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidArgument(format!("scale must be positive, got {c}")));
        }
        let kind = match &self.kind {
            OperatorKind::Affine { m, q } => OperatorKind::Affine { m: m * c, q: q * c },
            OperatorKind::FictitiousPlay { a } => OperatorKind::FictitiousPlay { a: a * c },
            OperatorKind::LpSaddle { a, b, c: cost } => {
                OperatorKind::LpSaddle { a: a * c, b: b * c, c: cost * c }
            }
            OperatorKind::SaddleQuadratic { qx, qy, b, q } => {
                OperatorKind::SaddleQuadratic { qx: qx * c, qy: qy * c, b: b * c, q: q * c }
            }
        };
        Ok(Self { dim: self.dim, mu: self.mu * c, kind })
    }

    /// `F(x)`.
    pub fn evaluate(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.dim, x.len())?;
        check_finite("operator argument", x.as_slice())?;
        Ok(self.apply(x))
    }

    pub(crate) fn apply(&self, z: &DVector<f64>) -> DVector<f64> {
        match &self.kind {
            OperatorKind::Affine { m, q } => m * z + q,
            OperatorKind::FictitiousPlay { a } => {
                let n = a.nrows();
                let x = z.rows(0, n);
                let y = z.rows(n, a.ncols());
                let top = -(a * y);
                let bottom = a.tr_mul(&x);
                stack(&top, &bottom)
            }
            OperatorKind::LpSaddle { a, b, c } => {
                let n = a.ncols();
                let x = z.rows(0, n);
                let y = z.rows(n, a.nrows());
                let top = c - a.tr_mul(&y);
                let bottom = a * x - b;
                stack(&top, &bottom)
            }
            OperatorKind::SaddleQuadratic { qx, qy, b, q } => {
                let n = qx.nrows();
                let m = qy.nrows();
                let x = z.rows(0, n);
                let y = z.rows(n, m);
                let top = qx * x + b * y + q.rows(0, n);
                let bottom = qy * y - b.tr_mul(&x) + q.rows(n, m);
                stack(&top, &bottom)
            }
        }
    }

    /// Analytic Jacobian (constant, since every variant is affine).
    pub fn jacobian(&self) -> DMatrix<f64> {
        match &self.kind {
            OperatorKind::Affine { m, .. } => m.clone(),
            OperatorKind::FictitiousPlay { a } => {
                let (n, m) = a.shape();
                let mut j = DMatrix::zeros(n + m, n + m);
                j.view_mut((0, n), (n, m)).copy_from(&(-a));
                j.view_mut((n, 0), (m, n)).copy_from(&a.transpose());
                j
            }
            OperatorKind::LpSaddle { a, .. } => {
                let (m, n) = a.shape();
                let mut j = DMatrix::zeros(n + m, n + m);
                j.view_mut((0, n), (n, m)).copy_from(&(-a.transpose()));
                j.view_mut((n, 0), (m, n)).copy_from(a);
                j
            }
            OperatorKind::SaddleQuadratic { qx, qy, b, .. } => {
                let (n, m) = b.shape();
                let mut j = DMatrix::zeros(n + m, n + m);
                j.view_mut((0, 0), (n, n)).copy_from(qx);
                j.view_mut((0, n), (n, m)).copy_from(b);
                j.view_mut((n, 0), (m, n)).copy_from(&(-b.transpose()));
                j.view_mut((n, n), (m, m)).copy_from(qy);
                j
            }
        }
    }

    /// Central-difference Jacobian at `x` with step `h`.
    pub fn jacobian_fd(&self, x: &DVector<f64>, h: f64) -> Result<DMatrix<f64>> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidArgument(format!("step h must be positive, got {h}")));
        }
        check_dim(self.dim, x.len())?;
        check_finite("jacobian point", x.as_slice())?;
        let mut jac = DMatrix::zeros(self.dim, self.dim);
        let mut probe = x.clone();
        for j in 0..self.dim {
            probe[j] = x[j] + h;
            let fp = self.apply(&probe);
            probe[j] = x[j] - h;
            let fm = self.apply(&probe);
            probe[j] = x[j];
            jac.set_column(j, &((fp - fm) / (2.0 * h)));
        }
        Ok(jac)
    }

    /// Samples `trials` pairs uniformly in `[-1, 1]^n` and checks
    /// `<F(x) - F(y), x - y> >= mu ||x - y||^2`.
    pub fn check_monotone(&self, trials: usize, seed: u64) -> MonotonicityReport {
        let lo = DVector::from_element(self.dim, -1.0);
        let hi = DVector::from_element(self.dim, 1.0);
        self.check_monotone_in(&lo, &hi, trials, seed)
    }

    /// As [`Operator::check_monotone`], sampling in the bounding box of `set`.
    pub fn check_monotone_on(
        &self,
        set: &FeasibleSet,
        trials: usize,
        seed: u64,
    ) -> Result<MonotonicityReport> {
        check_dim(self.dim, set.dim())?;
        let (lo, hi) = set.bounding_box();
        Ok(self.check_monotone_in(&lo, &hi, trials, seed))
    }

    fn check_monotone_in(
        &self,
        lo: &DVector<f64>,
        hi: &DVector<f64>,
        trials: usize,
        seed: u64,
    ) -> MonotonicityReport {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draw = |rng: &mut ChaCha8Rng| {
            DVector::from_iterator(
                self.dim,
                (0..self.dim).map(|j| lo[j] + rng.gen::<f64>() * (hi[j] - lo[j])),
            )
        };
        let mut min_ratio = f64::INFINITY;
        let mut violations = 0;
        for _ in 0..trials {
            let x = draw(&mut rng);
            let y = draw(&mut rng);
            let d = &x - &y;
            let dd = d.norm_squared();
            if dd == 0.0 {
                continue;
            }
            let ratio = (self.apply(&x) - self.apply(&y)).dot(&d) / dd;
            min_ratio = min_ratio.min(ratio);
            if ratio < self.mu - PSD_TOL {
                violations += 1;
            }
        }
        MonotonicityReport { trials, mu: self.mu, min_ratio, violations }
    }
}

fn stack(top: &DVector<f64>, bottom: &DVector<f64>) -> DVector<f64> {
    let mut out = DVector::zeros(top.len() + bottom.len());
    out.rows_mut(0, top.len()).copy_from(top);
    out.rows_mut(top.len(), bottom.len()).copy_from(bottom);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::{dmatrix, dvector};

    #[test]
    fn evaluate_examples() {
        let fp = Operator::fictitious_play(DMatrix::identity(2, 2)).unwrap();
        let f = fp.evaluate(&dvector![1.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(f, dvector![0.0, -1.0, 1.0, 0.0]);

        let aff = Operator::affine(DMatrix::identity(2, 2), dvector![-1.0, -1.0], 1.0).unwrap();
        assert_eq!(aff.evaluate(&dvector![1.0, 1.0]).unwrap(), dvector![0.0, 0.0]);

        let lp = Operator::lp_saddle(dmatrix![1.0], dvector![1.0], dvector![1.0]).unwrap();
        assert_eq!(lp.evaluate(&dvector![0.0, 0.0]).unwrap(), dvector![1.0, -1.0]);
    }

    #[test]
    fn rectangular_lp_saddle_layout() {
        // A is 1x2: x in R^2, y in R^1
        let lp = Operator::lp_saddle(dmatrix![1.0, 2.0], dvector![3.0], dvector![1.0, 1.0]).unwrap();
        assert_eq!(lp.dim(), 3);
        let f = lp.evaluate(&dvector![1.0, 1.0, 2.0]).unwrap();
        assert_eq!(f, dvector![1.0 - 2.0, 1.0 - 4.0, 3.0 - 3.0]);
    }

    #[test]
    fn evaluate_rejects_dimension_mismatch() {
        let fp = Operator::fictitious_play(DMatrix::identity(2, 3)).unwrap();
        assert_eq!(fp.dim(), 5);
        assert!(matches!(
            fp.evaluate(&dvector![1.0, 0.0]),
            Err(Error::DimensionMismatch { expected: 5, found: 2 })
        ));
    }

    #[test]
    fn declared_modulus_is_verified() {
        assert!(Operator::affine(DMatrix::identity(2, 2) * 2.0, DVector::zeros(2), 2.0).is_ok());
        assert!(Operator::affine(DMatrix::identity(2, 2), DVector::zeros(2), 1.5).is_err());
        assert!(Operator::affine(dmatrix![-1.0, 0.0; 0.0, 1.0], DVector::zeros(2), 0.0).is_err());
        assert!(Operator::affine_auto(dmatrix![-1.0, 0.0; 0.0, 1.0], DVector::zeros(2)).is_err());
        let skew = Operator::affine_auto(dmatrix![0.0, 1.0; -1.0, 0.0], DVector::zeros(2)).unwrap();
        assert_eq!(skew.mu(), 0.0);
        let sq = Operator::saddle_quadratic(
            dmatrix![2.0, 0.0; 0.0, 3.0],
            dmatrix![1.5],
            dmatrix![1.0; -1.0],
            DVector::zeros(3),
        )
        .unwrap();
        assert_abs_diff_eq!(sq.mu(), 1.5, epsilon = 1e-12);
        assert!(Operator::saddle_quadratic(
            dmatrix![1.0, 2.0; 0.0, 1.0],
            dmatrix![1.0],
            dmatrix![1.0; 1.0],
            DVector::zeros(3)
        )
        .is_err());
    }

    #[test]
    fn monotonicity_examples() {
        let a = dmatrix![1.0, -2.0, 0.5; 3.0, 0.0, -1.0];
        let fp = Operator::fictitious_play(a).unwrap();
        let r = fp.check_monotone(1000, 7);
        assert!(r.passed());
        assert!(r.min_ratio.abs() <= 1e-10);

        let two = Operator::affine(DMatrix::identity(3, 3) * 2.0, DVector::zeros(3), 2.0).unwrap();
        let r = two.check_monotone(1000, 7);
        assert!(r.passed());
        assert!(r.min_ratio >= 2.0 - 1e-10);

        let skew = Operator::affine(dmatrix![0.0, 1.0; -1.0, 0.0], DVector::zeros(2), 0.0).unwrap();
        assert!(skew.check_monotone(1000, 7).min_ratio.abs() <= 1e-10);
    }

    #[test]
    fn finite_difference_jacobian_matches_linear_part() {
        let m = dmatrix![2.0, 1.0; -1.0, 3.0];
        let aff = Operator::affine(m.clone(), dvector![0.3, -0.2], 0.0).unwrap();
        let j = aff.jacobian_fd(&dvector![0.4, -1.2], 1e-5).unwrap();
        assert_abs_diff_eq!(j, m, epsilon = 1e-9);

        let a = dmatrix![1.0, 2.0; 3.0, 4.0];
        let fp = Operator::fictitious_play(a.clone()).unwrap();
        let j = fp.jacobian_fd(&dvector![0.1, 0.9, 0.5, 0.5], 1e-5).unwrap();
        let expected = dmatrix![
            0.0, 0.0, -1.0, -2.0;
            0.0, 0.0, -3.0, -4.0;
            1.0, 3.0, 0.0, 0.0;
            2.0, 4.0, 0.0, 0.0
        ];
        assert_abs_diff_eq!(j, expected, epsilon = 1e-9);
        assert!(fp.jacobian_fd(&dvector![0.0, 0.0, 0.0, 0.0], 0.0).is_err());
    }

    #[test]
    fn saddle_quadratic_jacobian_by_hand() {
        // d/dx (Qx x + B y + qx) = [Qx, B]; d/dy of (Qy y - B'x + qy) = [-B', Qy]
        let qx = dmatrix![2.0, 0.5; 0.5, 1.0];
        let qy = dmatrix![1.0, 0.0; 0.0, 4.0];
        let b = dmatrix![1.0, -2.0; 0.0, 3.0];
        let q = dvector![0.1, 0.2, 0.3, 0.4];
        let op = Operator::saddle_quadratic(qx, qy, b, q).unwrap();
        let by_hand = dmatrix![
            2.0, 0.5, 1.0, -2.0;
            0.5, 1.0, 0.0, 3.0;
            -1.0, 0.0, 1.0, 0.0;
            2.0, -3.0, 0.0, 4.0
        ];
        let j = op.jacobian_fd(&dvector![0.3, -0.1, 0.7, 0.2], 1e-5).unwrap();
        assert_abs_diff_eq!(j, by_hand, epsilon = 1e-8);
        assert_eq!(op.jacobian(), by_hand);
    }

    #[test]
    fn scaling_scales_values_and_modulus() {
        let op = Operator::affine(DMatrix::identity(2, 2) * 2.0, dvector![1.0, -1.0], 2.0).unwrap();
        let s = op.scaled(3.0).unwrap();
        assert_eq!(s.mu(), 6.0);
        let x = dvector![0.25, 0.5];
        assert_abs_diff_eq!(s.evaluate(&x).unwrap(), op.evaluate(&x).unwrap() * 3.0, epsilon = 1e-15);
        assert!(op.scaled(0.0).is_err());
    }
}
