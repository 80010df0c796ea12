//! The discriminant objective and its derivatives.
//!
//! ```text
//! f(U)          = tr(Uᵀ (S_W - S_B) U) + λ Σ|U_ij|
//! ∇f(U)         = 2 S_W U - 2 S_B U + λ sgn(U)
//! Hess f(U)[ξ]  = 2 S_W ξ - 2 S_B ξ + 2λ σ(U) ∘ ξ,   σ(U)_ij = [U_ij = 0]
//! grad f(U)     = P_U(G⁻¹ ∇f(U))
//! hess f(U)[ξ]  = P_U(G⁻¹ Hess f(U)[ξ]) - P_U(ξ sym(Uᵀ ∇f(U)))
//! ```
//!
//! The second term of `hess` is the curvature correction of the embedded
//! submanifold; [`HessianMode::Projected`] drops it.

use nalgebra::DMatrix;

use crate::error::{check_shape, contract, Error, Result};
use crate::linalg::{sign, sym, zero_mask};
use crate::manifolds::{ManifoldKind, ManifoldVariant, StiefelPoint, TangentVector};
use crate::scatter::ScatterPair;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(rename_all = "kebab-case")
)]
pub enum HessianMode {
    /// Projection of the Euclidean Hessian only.
    Projected,
    /// Projection plus the curvature term; self-adjoint on the tangent space.
    #[default]
    ProjectedWithCorrection,
}

/// Scatter pair, manifold and sparsity weight bundled into a differentiable
/// objective.
#[derive(Clone, Debug)]
pub struct RdaProblem {
    scatter: ScatterPair,
    difference: DMatrix<f64>,
    manifold: ManifoldKind,
    subspace_dim: usize,
    lambda: f64,
    hessian_mode: HessianMode,
}

impl RdaProblem {
    pub fn new(
        scatter: ScatterPair,
        manifold: ManifoldKind,
        subspace_dim: usize,
        lambda: f64,
    ) -> Result<Self> {
        let dim = scatter.dim();
        check_shape("within-class scatter", (dim, dim), scatter.s_w.shape())?;
        check_shape("between-class scatter", (dim, dim), scatter.s_b.shape())?;
        if subspace_dim == 0 || subspace_dim > dim {
            return Err(contract!(
                "subspace dimension {subspace_dim} outside 1..={dim}"
            ));
        }
        if let Some(g) = manifold.metric_matrix() {
            check_shape("metric matrix", (dim, dim), g.shape())?;
        }
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(contract!("sparsity weight must be finite and ≥ 0, got {lambda}"));
        }
        if lambda > 0.0 && manifold.is_grassmann() {
            return Err(contract!(
                "the L1 penalty is not invariant under rotations; use a Stiefel variant when λ > 0"
            ));
        }
        let difference = sym(&scatter.difference());
        Ok(Self {
            scatter,
            difference,
            manifold,
            subspace_dim,
            lambda,
            hessian_mode: HessianMode::default(),
        })
    }

    pub fn with_hessian_mode(mut self, mode: HessianMode) -> Self {
        self.hessian_mode = mode;
        self
    }

    pub fn scatter(&self) -> &ScatterPair {
        &self.scatter
    }

    /// `S_W - S_B`.
    pub fn difference(&self) -> &DMatrix<f64> {
        &self.difference
    }

    pub fn manifold(&self) -> &ManifoldKind {
        &self.manifold
    }

    pub fn dim(&self) -> usize {
        self.scatter.dim()
    }

    pub fn subspace_dim(&self) -> usize {
        self.subspace_dim
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn hessian_mode(&self) -> HessianMode {
        self.hessian_mode
    }

    fn check_point(&self, u: &StiefelPoint) -> Result<()> {
        check_shape("point", (self.dim(), self.subspace_dim), u.dims())?;
        self.manifold.check_point(u)
    }

    fn check_tangent(&self, xi: &TangentVector) -> Result<()> {
        check_shape("tangent vector", (self.dim(), self.subspace_dim), xi.matrix().shape())
    }

    pub fn cost(&self, u: &StiefelPoint) -> Result<f64> {
        self.check_point(u)?;
        Ok(self.cost_unchecked(u))
    }

    pub(crate) fn cost_unchecked(&self, u: &StiefelPoint) -> f64 {
        let u = u.matrix();
        let smooth = u.dot(&(&self.difference * u));
        if self.lambda > 0.0 {
            smooth + self.lambda * u.iter().map(|v| v.abs()).sum::<f64>()
        } else {
            smooth
        }
    }

    /// `f(V) - f(U)` without subtracting two large costs:
    /// `tr(VᵀMV) - tr(UᵀMU) = tr((V - U)ᵀ M (V + U))` for symmetric `M`, and
    /// the L1 part summed entrywise. The error scales with `‖V - U‖`.
    pub(crate) fn cost_change_unchecked(&self, u: &StiefelPoint, v: &StiefelPoint) -> f64 {
        let (u, v) = (u.matrix(), v.matrix());
        let smooth = (v - u).dot(&(&self.difference * (v + u)));
        if self.lambda > 0.0 {
            smooth + self.lambda * v.iter().zip(u.iter()).map(|(a, b)| a.abs() - b.abs()).sum::<f64>()
        } else {
            smooth
        }
    }

    pub fn euclidean_grad(&self, u: &StiefelPoint) -> Result<DMatrix<f64>> {
        self.check_point(u)?;
        Ok(self.euclidean_grad_unchecked(u))
    }

    pub(crate) fn euclidean_grad_unchecked(&self, u: &StiefelPoint) -> DMatrix<f64> {
        let u = u.matrix();
        let mut g = &self.difference * u * 2.0;
        if self.lambda > 0.0 {
            g += sign(u) * self.lambda;
        }
        g
    }

    pub fn riemannian_grad(&self, u: &StiefelPoint) -> Result<TangentVector> {
        self.check_point(u)?;
        Ok(self.riemannian_grad_from(u, &self.euclidean_grad_unchecked(u)))
    }

    pub(crate) fn riemannian_grad_from(&self, u: &StiefelPoint, egrad: &DMatrix<f64>) -> TangentVector {
        self.manifold.project_unchecked(u, &self.manifold.riesz(egrad))
    }

    pub fn euclidean_hess_vec(&self, u: &StiefelPoint, xi: &TangentVector) -> Result<DMatrix<f64>> {
        self.check_point(u)?;
        self.check_tangent(xi)?;
        Ok(self.euclidean_hess_vec_unchecked(u, xi))
    }

    pub(crate) fn euclidean_hess_vec_unchecked(&self, u: &StiefelPoint, xi: &TangentVector) -> DMatrix<f64> {
        let mut h = &self.difference * xi.matrix() * 2.0;
        if self.lambda > 0.0 {
            let masked = zero_mask(u.matrix()).component_mul(xi.matrix());
            h += masked * (2.0 * self.lambda);
        }
        h
    }

    pub fn riemannian_hess_vec(&self, u: &StiefelPoint, xi: &TangentVector) -> Result<TangentVector> {
        self.check_point(u)?;
        self.check_tangent(xi)?;
        let egrad = self.euclidean_grad_unchecked(u);
        Ok(self.riemannian_hess_vec_with(u, &egrad, xi, self.hessian_mode))
    }

    /// Hessian-vector product with a precomputed Euclidean gradient.
    pub(crate) fn riemannian_hess_vec_with(
        &self,
        u: &StiefelPoint,
        egrad: &DMatrix<f64>,
        xi: &TangentVector,
        mode: HessianMode,
    ) -> TangentVector {
        let ehess = self.manifold.riesz(&self.euclidean_hess_vec_unchecked(u, xi));
        let ambient = match mode {
            HessianMode::Projected => ehess,
            HessianMode::ProjectedWithCorrection => {
                ehess - xi.matrix() * sym(&(u.matrix().transpose() * egrad))
            }
        };
        self.manifold.project_unchecked(u, &ambient)
    }

    /// The curvature term `P_U(ξ sym(Uᵀ∇f(U)))` that separates the two modes.
    pub fn curvature_term(&self, u: &StiefelPoint, xi: &TangentVector) -> Result<TangentVector> {
        self.check_point(u)?;
        self.check_tangent(xi)?;
        let egrad = self.euclidean_grad_unchecked(u);
        Ok(self
            .manifold
            .project_unchecked(u, &(xi.matrix() * sym(&(u.matrix().transpose() * egrad)))))
    }
}

/// Manifold for `variant`, using `S_W + εI` with `ε = 1e-8·tr(S_W)/D` as the
/// metric matrix of the generalized variants.
pub fn manifold_from_scatter(variant: ManifoldVariant, scatter: &ScatterPair) -> Result<ManifoldKind> {
    if !variant.is_generalized() {
        return ManifoldKind::new(variant, None);
    }
    let dim = scatter.dim();
    let eps = 1e-8 * scatter.s_w.trace() / dim as f64;
    let g = sym(&(&scatter.s_w + DMatrix::identity(dim, dim) * eps));
    ManifoldKind::new(variant, Some(g)).map_err(|e| match e {
        Error::NotSpd(msg) => Error::Config(alloc::format!(
            "within-class scatter cannot serve as a metric: {msg}"
        )),
        other => other,
    })
}
