//! Stiefel and Grassmann manifolds, plain and generalized.
//!
//! Points are `D×d` matrices `U` with `UᵀGU = I_d`, where `G = I` for the
//! plain variants and a fixed symmetric positive-definite matrix for the
//! generalized ones. Grassmann variants are quotients by the orthogonal group
//! `O(d)`; a point is stored as any Stiefel representative and tangent
//! vectors live in the horizontal space.
//!
//! ```text
//! metric          g_U(ξ, η) = tr(ξᵀ G η)
//! Stiefel         P_U(Z) = Z - U sym(Uᵀ G Z)
//! Grassmann       P_U(Z) = Z - U (Uᵀ G Z)
//! retraction      R_U(ξ) = qf(U + ξ)              (G = I)
//!                 R_U(ξ) = (U + ξ) L⁻ᵀ,  LLᵀ = (U + ξ)ᵀ G (U + ξ)
//! transport       T_{U→V}(ξ) = P_V(ξ)
//! ```
//!
//! The projectors above are orthogonal with respect to `g`, so the Riemannian
//! gradient of a function with Euclidean gradient `∇f` is `P_U(G⁻¹ ∇f)`.

use alloc::sync::Arc;

use nalgebra::{Cholesky, DMatrix, Dyn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{check_shape, contract, Error, Result};
use crate::linalg::{qf, relative_asymmetry, sym};

/// Feasibility tolerance on `‖UᵀGU - I‖_F`.
pub const POINT_TOL: f64 = 1e-10;
/// Relative tolerance for the tangency conditions.
pub const TANGENT_TOL: f64 = 1e-10;
/// Relative tolerance on the asymmetry of a metric matrix.
pub const METRIC_SYMMETRY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(rename_all = "kebab-case")
)]
pub enum ManifoldVariant {
    Stiefel,
    Grassmann,
    GeneralizedStiefel,
    GeneralizedGrassmann,
}

impl ManifoldVariant {
    pub const ALL: [ManifoldVariant; 4] = [
        ManifoldVariant::Stiefel,
        ManifoldVariant::Grassmann,
        ManifoldVariant::GeneralizedStiefel,
        ManifoldVariant::GeneralizedGrassmann,
    ];

    pub fn is_grassmann(self) -> bool {
        matches!(self, Self::Grassmann | Self::GeneralizedGrassmann)
    }

    pub fn is_generalized(self) -> bool {
        matches!(self, Self::GeneralizedStiefel | Self::GeneralizedGrassmann)
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Stiefel => "stiefel",
            Self::Grassmann => "grassmann",
            Self::GeneralizedStiefel => "generalized-stiefel",
            Self::GeneralizedGrassmann => "generalized-grassmann",
        }
    }
}

/// A symmetric positive-definite metric matrix together with its Cholesky
/// factor, computed once at construction.
#[derive(Clone, Debug)]
pub struct SpdMetric {
    matrix: DMatrix<f64>,
    cholesky: Cholesky<f64, Dyn>,
}

impl SpdMetric {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSpd("matrix is not square"));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::NotSpd("matrix has non-finite entries"));
        }
        if relative_asymmetry(&matrix) > METRIC_SYMMETRY_TOL {
            return Err(Error::NotSpd("matrix is not symmetric"));
        }
        let cholesky = Cholesky::new(matrix.clone())
            .ok_or(Error::NotSpd("Cholesky factorization failed"))?;
        if cholesky.l_dirty().diagonal().iter().any(|&v| v <= 0.0) {
            return Err(Error::NotSpd("matrix is singular"));
        }
        Ok(Self { matrix, cholesky })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `G⁻¹ Z` through the cached factorization.
    pub fn solve(&self, z: &DMatrix<f64>) -> DMatrix<f64> {
        self.cholesky.solve(z)
    }
}

/// Which manifold an optimization variable lives on.
#[derive(Clone, Debug)]
pub struct ManifoldKind {
    variant: ManifoldVariant,
    metric: Option<Arc<SpdMetric>>,
}

/// A point `U` on one of the manifolds. Construct through
/// [`ManifoldKind::point`], [`ManifoldKind::retract`] or
/// [`ManifoldKind::random_point`].
#[derive(Clone, Debug, PartialEq)]
pub struct StiefelPoint {
    matrix: DMatrix<f64>,
}

impl StiefelPoint {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    /// `(D, d)`.
    pub fn dims(&self) -> (usize, usize) {
        self.matrix.shape()
    }
}

/// A tangent (or, for Grassmann variants, horizontal) vector at some point.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector {
    matrix: DMatrix<f64>,
}

impl TangentVector {
    pub(crate) fn from_matrix(matrix: DMatrix<f64>) -> Self {
        Self { matrix }
    }

    pub fn zeros(point: &StiefelPoint) -> Self {
        let (rows, cols) = point.dims();
        Self::from_matrix(DMatrix::zeros(rows, cols))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self::from_matrix(&self.matrix * alpha)
    }

    /// `self + alpha * other`. Both vectors must be tangent at the same point.
    pub fn add_scaled(&self, alpha: f64, other: &TangentVector) -> Self {
        Self::from_matrix(&self.matrix + &other.matrix * alpha)
    }

    pub(crate) fn axpy_mut(&mut self, alpha: f64, other: &TangentVector) {
        self.matrix += &other.matrix * alpha;
    }
}

impl ManifoldKind {
    pub fn stiefel() -> Self {
        Self {
            variant: ManifoldVariant::Stiefel,
            metric: None,
        }
    }

    pub fn grassmann() -> Self {
        Self {
            variant: ManifoldVariant::Grassmann,
            metric: None,
        }
    }

    pub fn generalized_stiefel(g: DMatrix<f64>) -> Result<Self> {
        Self::new(ManifoldVariant::GeneralizedStiefel, Some(g))
    }

    pub fn generalized_grassmann(g: DMatrix<f64>) -> Result<Self> {
        Self::new(ManifoldVariant::GeneralizedGrassmann, Some(g))
    }

    /// The metric matrix must be present exactly for the generalized variants.
    pub fn new(variant: ManifoldVariant, metric: Option<DMatrix<f64>>) -> Result<Self> {
        match (variant.is_generalized(), metric) {
            (false, None) => Ok(Self {
                variant,
                metric: None,
            }),
            (true, Some(g)) => Ok(Self {
                variant,
                metric: Some(Arc::new(SpdMetric::new(g)?)),
            }),
            (false, Some(_)) => Err(contract!(
                "{} does not take a metric matrix",
                variant.name()
            )),
            (true, None) => Err(contract!("{} requires a metric matrix", variant.name())),
        }
    }

    pub fn variant(&self) -> ManifoldVariant {
        self.variant
    }

    pub fn metric(&self) -> Option<&SpdMetric> {
        self.metric.as_deref()
    }

    pub fn metric_matrix(&self) -> Option<&DMatrix<f64>> {
        self.metric.as_deref().map(SpdMetric::matrix)
    }

    pub fn is_grassmann(&self) -> bool {
        self.variant.is_grassmann()
    }

    fn check_ambient(&self, rows: usize) -> Result<()> {
        match &self.metric {
            Some(m) if m.dim() != rows => Err(Error::DimensionMismatch {
                what: "metric matrix",
                expected: (rows, rows),
                got: (m.dim(), m.dim()),
            }),
            _ => Ok(()),
        }
    }

    /// `G Z`, or `Z` for the plain variants.
    fn apply_metric(&self, z: &DMatrix<f64>) -> DMatrix<f64> {
        match &self.metric {
            Some(m) => m.matrix() * z,
            None => z.clone(),
        }
    }

    /// `G⁻¹ Z`, or `Z` for the plain variants.
    pub fn riesz(&self, z: &DMatrix<f64>) -> DMatrix<f64> {
        match &self.metric {
            Some(m) => m.solve(z),
            None => z.clone(),
        }
    }

    /// `‖UᵀGU - I‖_F`.
    pub fn feasibility_error(&self, u: &DMatrix<f64>) -> f64 {
        let gram = u.transpose() * self.apply_metric(u);
        (gram - DMatrix::identity(u.ncols(), u.ncols())).norm()
    }

    /// Validates `u` against the point invariant of this manifold.
    pub fn point(&self, u: DMatrix<f64>) -> Result<StiefelPoint> {
        let (rows, cols) = u.shape();
        if cols == 0 || cols > rows {
            return Err(contract!("point must be D×d with 1 ≤ d ≤ D, got {rows}×{cols}"));
        }
        self.check_ambient(rows)?;
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("point"));
        }
        let err = self.feasibility_error(&u);
        if err > POINT_TOL {
            return Err(contract!(
                "point violates the {} constraint by {err:e}",
                self.variant.name()
            ));
        }
        Ok(StiefelPoint { matrix: u })
    }

    pub fn check_point(&self, point: &StiefelPoint) -> Result<()> {
        self.check_ambient(point.matrix.nrows())?;
        let err = self.feasibility_error(&point.matrix);
        if err > POINT_TOL {
            return Err(contract!(
                "point violates the {} constraint by {err:e}",
                self.variant.name()
            ));
        }
        Ok(())
    }

    /// Size of the violated tangency condition, relative to `max(1, ‖ξ‖_F)`.
    pub fn tangency_error(&self, point: &StiefelPoint, xi: &DMatrix<f64>) -> f64 {
        let utgx = point.matrix.transpose() * self.apply_metric(xi);
        let violation = if self.is_grassmann() {
            utgx.norm()
        } else {
            sym(&utgx).norm()
        };
        violation / xi.norm().max(1.0)
    }

    /// Validates `xi` as a tangent vector at `point`.
    pub fn tangent(&self, point: &StiefelPoint, xi: DMatrix<f64>) -> Result<TangentVector> {
        check_shape("tangent vector", point.dims(), xi.shape())?;
        let err = self.tangency_error(point, &xi);
        if err > TANGENT_TOL {
            return Err(contract!("matrix is not tangent at the point (error {err:e})"));
        }
        Ok(TangentVector::from_matrix(xi))
    }

    /// Riemannian metric `tr(ξᵀ G η)`.
    pub fn inner(&self, point: &StiefelPoint, xi: &TangentVector, eta: &TangentVector) -> Result<f64> {
        check_shape("inner product", point.dims(), xi.matrix.shape())?;
        check_shape("inner product", point.dims(), eta.matrix.shape())?;
        self.check_ambient(point.matrix.nrows())?;
        Ok(self.inner_unchecked(&xi.matrix, &eta.matrix))
    }

    /// The same bilinear form on arbitrary ambient matrices.
    pub fn ambient_inner(&self, a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        self.inner_unchecked(a, b)
    }

    pub(crate) fn inner_unchecked(&self, a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        match &self.metric {
            Some(m) => a.dot(&(m.matrix() * b)),
            None => a.dot(b),
        }
    }

    pub fn norm(&self, point: &StiefelPoint, xi: &TangentVector) -> Result<f64> {
        Ok(libm::sqrt(self.inner(point, xi, xi)?.max(0.0)))
    }

    pub(crate) fn norm_unchecked(&self, xi: &TangentVector) -> f64 {
        libm::sqrt(self.inner_unchecked(&xi.matrix, &xi.matrix).max(0.0))
    }

    /// Orthogonal projection of an ambient `D×d` matrix onto the tangent
    /// (horizontal) space at `point`.
    pub fn project_tangent(&self, point: &StiefelPoint, z: &DMatrix<f64>) -> Result<TangentVector> {
        check_shape("tangent projection", point.dims(), z.shape())?;
        self.check_ambient(point.matrix.nrows())?;
        Ok(self.project_unchecked(point, z))
    }

    pub(crate) fn project_unchecked(&self, point: &StiefelPoint, z: &DMatrix<f64>) -> TangentVector {
        let u = &point.matrix;
        let utgz = u.transpose() * self.apply_metric(z);
        let normal = if self.is_grassmann() {
            utgz
        } else {
            sym(&utgz)
        };
        TangentVector::from_matrix(z - u * normal)
    }

    /// Maps `Y` onto the manifold: QR for the plain variants, the
    /// `G`-weighted Cholesky correction for the generalized ones.
    fn orthonormalize(&self, y: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        match &self.metric {
            None => qf(y).ok_or(Error::RetractionFailed("U + ξ is rank deficient")),
            Some(m) => {
                let gram = y.transpose() * (m.matrix() * y);
                let gram = sym(&gram);
                let chol = Cholesky::new(gram)
                    .ok_or(Error::RetractionFailed("(U + ξ)ᵀG(U + ξ) is not positive definite"))?;
                let l = chol.l();
                let solved = l
                    .solve_lower_triangular(&y.transpose())
                    .ok_or(Error::RetractionFailed("singular Cholesky factor"))?;
                Ok(solved.transpose())
            }
        }
    }

    pub fn retract(&self, point: &StiefelPoint, xi: &TangentVector) -> Result<StiefelPoint> {
        check_shape("retraction", point.dims(), xi.matrix.shape())?;
        self.check_ambient(point.matrix.nrows())?;
        self.retract_unchecked(point, xi)
    }

    pub(crate) fn retract_unchecked(&self, point: &StiefelPoint, xi: &TangentVector) -> Result<StiefelPoint> {
        let y = &point.matrix + &xi.matrix;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("retraction"));
        }
        Ok(StiefelPoint {
            matrix: self.orthonormalize(&y)?,
        })
    }

    /// Re-projects a drifted iterate onto the manifold.
    pub(crate) fn reorthonormalize(&self, point: &StiefelPoint) -> Result<StiefelPoint> {
        Ok(StiefelPoint {
            matrix: self.orthonormalize(&point.matrix)?,
        })
    }

    /// Projection transport of `xi` from `from` to the tangent space at `to`.
    pub fn transport(
        &self,
        from: &StiefelPoint,
        to: &StiefelPoint,
        xi: &TangentVector,
    ) -> Result<TangentVector> {
        check_shape("transport", from.dims(), xi.matrix.shape())?;
        check_shape("transport", from.dims(), to.dims())?;
        self.project_tangent(to, &xi.matrix)
    }

    /// Seeded random point: standard-normal entries mapped onto the manifold.
    pub fn random_point(&self, dim: usize, subspace_dim: usize, seed: u64) -> Result<StiefelPoint> {
        if subspace_dim == 0 || subspace_dim > dim {
            return Err(contract!(
                "random point needs 1 ≤ d ≤ D, got D = {dim}, d = {subspace_dim}"
            ));
        }
        self.check_ambient(dim)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = DMatrix::from_fn(dim, subspace_dim, |_, _| StandardNormal.sample(&mut rng));
        Ok(StiefelPoint {
            matrix: self.orthonormalize(&z)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(values: &[f64]) -> DMatrix<f64> {
        DMatrix::from_column_slice(values.len(), 1, values)
    }

    fn spd(dim: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a: DMatrix<f64> = DMatrix::from_fn(dim, dim, |_, _| StandardNormal.sample(&mut rng));
        let g = &a * a.transpose() + DMatrix::identity(dim, dim);
        sym(&g)
    }

    #[test]
    fn inner_of_example_vectors() {
        let m = ManifoldKind::stiefel();
        let u = m.point(col(&[2.0, -1.0, 1.0]) / 6f64.sqrt()).unwrap();
        let xi = m.tangent(&u, col(&[1.0, 2.0, 0.0])).unwrap();
        let eta = m.tangent(&u, col(&[0.0, 1.0, 1.0])).unwrap();
        assert_eq!(m.inner(&u, &xi, &eta).unwrap(), 2.0);
        let zero = TangentVector::zeros(&u);
        assert_eq!(m.inner(&u, &zero, &zero).unwrap(), 0.0);
    }

    #[test]
    fn inner_rejects_mismatched_dims() {
        let m = ManifoldKind::stiefel();
        let u = m.point(col(&[1.0, 0.0])).unwrap();
        let bad = TangentVector::from_matrix(DMatrix::zeros(3, 1));
        let ok = TangentVector::zeros(&u);
        assert!(matches!(
            m.inner(&u, &bad, &ok),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn projection_examples() {
        let m = ManifoldKind::stiefel();
        let u = m.point(col(&[1.0, 0.0])).unwrap();
        let p = m.project_tangent(&u, &col(&[3.0, 4.0])).unwrap();
        assert_eq!(p.matrix(), &col(&[0.0, 4.0]));
        let p = m.project_tangent(&u, u.matrix()).unwrap();
        assert!(p.matrix().norm() < 1e-15);
    }

    #[test]
    fn retraction_examples() {
        let m = ManifoldKind::stiefel();
        let u = m.point(col(&[1.0, 0.0])).unwrap();
        let xi = m.tangent(&u, col(&[0.0, 1.0])).unwrap();
        let r = m.retract(&u, &xi).unwrap();
        let h = 1.0 / 2f64.sqrt();
        assert!((r.matrix() - col(&[h, h])).norm() < 1e-15);
        let r0 = m.retract(&u, &TangentVector::zeros(&u)).unwrap();
        assert!((r0.matrix() - u.matrix()).norm() < 1e-12);
    }

    #[test]
    fn transport_example() {
        let m = ManifoldKind::stiefel();
        let u = m.point(col(&[1.0, 0.0])).unwrap();
        let v = m.point(col(&[0.0, 1.0])).unwrap();
        let xi = m.tangent(&u, col(&[0.0, 2.0])).unwrap();
        let t = m.transport(&u, &v, &xi).unwrap();
        assert_eq!(t.matrix(), &col(&[0.0, 0.0]));
        let same = m.transport(&u, &u, &xi).unwrap();
        assert!((same.matrix() - xi.matrix()).norm() < 1e-15);
    }

    #[test]
    fn random_point_contract() {
        let m = ManifoldKind::stiefel();
        let a = m.random_point(7, 3, 11).unwrap();
        let b = m.random_point(7, 3, 11).unwrap();
        let c = m.random_point(7, 3, 12).unwrap();
        assert_eq!(a, b);
        assert!((a.matrix() - c.matrix()).norm() > 0.0);
        assert!(m.feasibility_error(a.matrix()) < 1e-10);
        assert!(m.random_point(3, 4, 0).is_err());
        assert!(m.random_point(3, 0, 0).is_err());
    }

    #[test]
    fn generalized_points_are_g_orthonormal() {
        let g = spd(6, 3);
        for variant in [
            ManifoldVariant::GeneralizedStiefel,
            ManifoldVariant::GeneralizedGrassmann,
        ] {
            let m = ManifoldKind::new(variant, Some(g.clone())).unwrap();
            let u = m.random_point(6, 2, 5).unwrap();
            let gram = u.matrix().transpose() * &g * u.matrix();
            assert!((gram - DMatrix::identity(2, 2)).norm() < 1e-10);
            let z = DMatrix::from_fn(6, 2, |i, j| (i * 2 + j) as f64 - 3.0);
            let xi = m.project_tangent(&u, &z).unwrap();
            assert!(m.tangency_error(&u, xi.matrix()) < 1e-10);
            let r = m.retract(&u, &xi).unwrap();
            assert!(m.feasibility_error(r.matrix()) < 1e-10);
        }
    }

    #[test]
    fn metric_validation() {
        assert!(SpdMetric::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.4, 1.0])).is_err());
        assert!(SpdMetric::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0])).is_err());
        assert!(SpdMetric::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0])).is_err());
        assert!(ManifoldKind::new(ManifoldVariant::Stiefel, Some(DMatrix::identity(2, 2))).is_err());
        assert!(ManifoldKind::new(ManifoldVariant::GeneralizedStiefel, None).is_err());
        let m = ManifoldKind::generalized_stiefel(DMatrix::identity(3, 3)).unwrap();
        assert!(m.random_point(4, 2, 0).is_err());
    }

    #[test]
    fn point_rejects_infeasible_matrix() {
        let m = ManifoldKind::stiefel();
        assert!(m.point(col(&[1.0, 1.0])).is_err());
        assert!(m.point(DMatrix::identity(2, 3)).is_err());
    }

    #[test]
    fn rank_deficient_retraction_fails() {
        let m = ManifoldKind::stiefel();
        let u = m.point(col(&[1.0, 0.0])).unwrap();
        let xi = TangentVector::from_matrix(col(&[-1.0, 0.0]));
        assert!(matches!(m.retract(&u, &xi), Err(Error::RetractionFailed(_))));
    }
}
