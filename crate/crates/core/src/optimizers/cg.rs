use alloc::vec;

use crate::cost::RdaProblem;
use crate::error::{Error, Result};
use crate::manifolds::{StiefelPoint, TangentVector};

use super::{settle, IterationInfo, OptimizationResult, Stopwatch, Termination};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(rename_all = "kebab-case")
)]
pub enum CgBeta {
    #[default]
    FletcherReeves,
    /// Polak–Ribière, clipped at zero.
    PolakRibiere,
}

/// How the gradient-norm stopping test compares against `grad_tol`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(rename_all = "kebab-case")
)]
pub enum StopNorm {
    /// `‖η‖² ≤ grad_tol`.
    #[default]
    Squared,
    /// `‖η‖ ≤ grad_tol`.
    Unsquared,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CgConfig {
    pub grad_tol: f64,
    pub max_iter: usize,
    pub armijo_c: f64,
    pub armijo_shrink: f64,
    pub initial_step: f64,
    pub max_backtracks: usize,
    pub beta: CgBeta,
    pub stop_norm: StopNorm,
}

impl Default for CgConfig {
    fn default() -> Self {
        Self {
            grad_tol: 1e-5,
            max_iter: 200,
            armijo_c: 1e-4,
            armijo_shrink: 0.5,
            initial_step: 1.0,
            max_backtracks: 50,
            beta: CgBeta::default(),
            stop_norm: StopNorm::default(),
        }
    }
}

impl CgConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.armijo_c > 0.0 && self.armijo_c < 1.0) {
            return Err(Error::Config(alloc::format!(
                "armijo_c must lie in (0, 1), got {}",
                self.armijo_c
            )));
        }
        if !(self.armijo_shrink > 0.0 && self.armijo_shrink < 1.0) {
            return Err(Error::Config(alloc::format!(
                "armijo_shrink must lie in (0, 1), got {}",
                self.armijo_shrink
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        if !(self.grad_tol > 0.0 && self.initial_step > 0.0) {
            return Err(Error::Config(
                "grad_tol and initial_step must be positive".into(),
            ));
        }
        Ok(())
    }

    fn converged(&self, grad_norm_sq: f64) -> bool {
        match self.stop_norm {
            StopNorm::Squared => grad_norm_sq <= self.grad_tol,
            StopNorm::Unsquared => libm::sqrt(grad_norm_sq) <= self.grad_tol,
        }
    }
}

pub fn solve_cg(p: &RdaProblem, init: &StiefelPoint, cfg: &CgConfig) -> Result<OptimizationResult> {
    solve_cg_with(p, init, cfg, |_| {})
}

/// Conjugate gradient with Armijo backtracking and projection transport.
///
/// Each iteration builds `ξ = -η + β T(ξ_prev)`, falling back to `-η` when
/// that is not a descent direction, then backtracks from `initial_step` until
/// `f(R(αξ)) ≤ f + cα⟨η, ξ⟩` holds with a strict decrease.
pub fn solve_cg_with<F>(
    p: &RdaProblem,
    init: &StiefelPoint,
    cfg: &CgConfig,
    mut observe: F,
) -> Result<OptimizationResult>
where
    F: FnMut(&IterationInfo),
{
    cfg.validate()?;
    let clock = Stopwatch::start();
    let manifold = p.manifold();

    let mut u = init.clone();
    let mut f = p.cost(&u)?;
    if !f.is_finite() {
        return Err(Error::NonFinite("cost"));
    }
    let mut grad = p.riemannian_grad_from(&u, &p.euclidean_grad_unchecked(&u));
    let mut grad_sq = manifold.inner_unchecked(grad.matrix(), grad.matrix());

    let mut cost_trace = vec![f];
    let mut grad_norm_trace = vec![libm::sqrt(grad_sq)];
    observe(&IterationInfo {
        iteration: 0,
        cost: f,
        grad_norm: libm::sqrt(grad_sq),
    });

    let finish = |point, cost_trace, grad_norm_trace, termination, iterations| {
        Ok(OptimizationResult {
            point,
            cost_trace,
            grad_norm_trace,
            termination,
            iterations,
            wall_time: clock.seconds(),
        })
    };

    if cfg.converged(grad_sq) {
        return finish(u, cost_trace, grad_norm_trace, Termination::GradTol, 0);
    }

    // Previous direction and gradient, already attached to the previous iterate.
    let mut previous: Option<(StiefelPoint, TangentVector, TangentVector, f64)> = None;

    for k in 0..cfg.max_iter {
        let steepest = grad.scaled(-1.0);
        let mut direction = match &previous {
            None => steepest.clone(),
            Some((prev_u, prev_dir, prev_grad, prev_sq)) => {
                let moved = manifold.transport(prev_u, &u, prev_dir)?;
                let beta = match cfg.beta {
                    CgBeta::FletcherReeves => grad_sq / prev_sq,
                    CgBeta::PolakRibiere => {
                        let moved_grad = manifold.transport(prev_u, &u, prev_grad)?;
                        let diff = grad.matrix() - moved_grad.matrix();
                        (manifold.inner_unchecked(grad.matrix(), &diff) / prev_sq).max(0.0)
                    }
                };
                steepest.add_scaled(beta, &moved)
            }
        };
        let mut slope = manifold.inner_unchecked(grad.matrix(), direction.matrix());
        if slope.is_nan() || slope >= 0.0 {
            direction = steepest;
            slope = -grad_sq;
        }

        let mut alpha = cfg.initial_step;
        let mut accepted = None;
        for _ in 0..=cfg.max_backtracks {
            if let Ok(candidate) = manifold.retract_unchecked(&u, &direction.scaled(alpha)) {
                let fc = p.cost_unchecked(&candidate);
                if !fc.is_finite() {
                    return Err(Error::NonFinite("cost"));
                }
                if fc <= f + cfg.armijo_c * alpha * slope && fc < f {
                    accepted = Some((candidate, fc));
                    break;
                }
            }
            alpha *= cfg.armijo_shrink;
        }
        let Some((candidate, fc)) = accepted else {
            return finish(u, cost_trace, grad_norm_trace, Termination::StepTooSmall, k);
        };

        let (next, moved) = settle(manifold, candidate)?;
        let fc = if moved { p.cost_unchecked(&next) } else { fc };
        let next_grad = p.riemannian_grad_from(&next, &p.euclidean_grad_unchecked(&next));
        let next_sq = manifold.inner_unchecked(next_grad.matrix(), next_grad.matrix());
        if !next_sq.is_finite() {
            return Err(Error::NonFinite("gradient"));
        }
        let prev_u = core::mem::replace(&mut u, next);
        let prev_grad = core::mem::replace(&mut grad, next_grad);
        previous = Some((prev_u, direction, prev_grad, grad_sq));
        grad_sq = next_sq;
        f = fc;

        cost_trace.push(f);
        grad_norm_trace.push(libm::sqrt(grad_sq));
        observe(&IterationInfo {
            iteration: k + 1,
            cost: f,
            grad_norm: libm::sqrt(grad_sq),
        });
        if cfg.converged(grad_sq) {
            return finish(u, cost_trace, grad_norm_trace, Termination::GradTol, k + 1);
        }
    }
    finish(u, cost_trace, grad_norm_trace, Termination::MaxIter, cfg.max_iter)
}
