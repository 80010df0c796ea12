use alloc::vec;

use nalgebra::DMatrix;

use crate::cost::RdaProblem;
use crate::error::{Error, Result};
use crate::manifolds::{StiefelPoint, TangentVector};

use super::{settle, IterationInfo, OptimizationResult, Stopwatch, Termination};

/// Trust-region settings. `None` fields resolve from the problem size:
/// `delta_bar = √d`, `delta0 = delta_bar / 8`, `tcg_max_inner = D·d`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrConfig {
    pub grad_tol: f64,
    pub max_outer_iter: usize,
    pub delta_bar: Option<f64>,
    pub delta0: Option<f64>,
    pub rho_prime: f64,
    pub tcg_max_inner: Option<usize>,
    pub tcg_kappa: f64,
    pub tcg_theta: f64,
}

impl Default for TrConfig {
    fn default() -> Self {
        Self {
            grad_tol: 1e-6,
            max_outer_iter: 200,
            delta_bar: None,
            delta0: None,
            rho_prime: 0.1,
            tcg_max_inner: None,
            tcg_kappa: 0.1,
            tcg_theta: 1.0,
        }
    }
}

struct Resolved {
    delta_bar: f64,
    delta0: f64,
    max_inner: usize,
}

impl TrConfig {
    fn resolve(&self, dim: usize, subspace_dim: usize) -> Result<Resolved> {
        let delta_bar = self.delta_bar.unwrap_or_else(|| libm::sqrt(subspace_dim as f64));
        let delta0 = self.delta0.unwrap_or(delta_bar / 8.0);
        if !(self.rho_prime > 0.0 && self.rho_prime < 0.25) {
            return Err(Error::Config(alloc::format!(
                "rho_prime must lie in (0, 0.25), got {}",
                self.rho_prime
            )));
        }
        if !(delta0 > 0.0 && delta0 <= delta_bar) {
            return Err(Error::Config(alloc::format!(
                "need 0 < delta0 ≤ delta_bar, got delta0 = {delta0}, delta_bar = {delta_bar}"
            )));
        }
        if !(self.grad_tol > 0.0 && self.tcg_kappa > 0.0 && self.tcg_theta > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        Ok(Resolved {
            delta_bar,
            delta0,
            max_inner: self.tcg_max_inner.unwrap_or(dim * subspace_dim).max(1),
        })
    }
}

pub fn solve_tr(p: &RdaProblem, init: &StiefelPoint, cfg: &TrConfig) -> Result<OptimizationResult> {
    solve_tr_with(p, init, cfg, |_| {})
}

struct InnerSolution {
    eta: TangentVector,
    hessian_eta: TangentVector,
    hit_boundary: bool,
}

/// Steihaug–Toint truncated CG on the model `⟨g, η⟩ + ½⟨H[η], η⟩`, `‖η‖ ≤ Δ`.
fn truncated_cg(
    p: &RdaProblem,
    u: &StiefelPoint,
    egrad: &DMatrix<f64>,
    grad: &TangentVector,
    radius: f64,
    cfg: &TrConfig,
    max_inner: usize,
) -> InnerSolution {
    let manifold = p.manifold();
    let inner = |a: &TangentVector, b: &TangentVector| manifold.inner_unchecked(a.matrix(), b.matrix());
    let hess = |v: &TangentVector| p.riemannian_hess_vec_with(u, egrad, v, p.hessian_mode());

    let mut eta = TangentVector::zeros(u);
    let mut hessian_eta = TangentVector::zeros(u);
    let mut residual = grad.clone();
    let mut r_r = inner(&residual, &residual);
    let norm_r0 = libm::sqrt(r_r);
    let target = norm_r0 * libm::pow(norm_r0, cfg.tcg_theta).min(cfg.tcg_kappa);

    let mut delta = residual.scaled(-1.0);
    let radius_sq = radius * radius;
    let mut e_pe = 0.0;
    let mut e_pd = 0.0;
    let mut d_pd = r_r;

    for _ in 0..max_inner {
        let h_delta = hess(&delta);
        let d_hd = inner(&delta, &h_delta);
        let alpha = r_r / d_hd;
        let e_pe_new = e_pe + 2.0 * alpha * e_pd + alpha * alpha * d_pd;

        if d_hd.is_nan() || d_hd <= 0.0 || e_pe_new >= radius_sq {
            let disc = (e_pd * e_pd + d_pd * (radius_sq - e_pe)).max(0.0);
            let tau = (-e_pd + libm::sqrt(disc)) / d_pd;
            eta.axpy_mut(tau, &delta);
            hessian_eta.axpy_mut(tau, &h_delta);
            return InnerSolution {
                eta,
                hessian_eta,
                hit_boundary: true,
            };
        }

        eta.axpy_mut(alpha, &delta);
        hessian_eta.axpy_mut(alpha, &h_delta);
        e_pe = e_pe_new;

        residual.axpy_mut(alpha, &h_delta);
        residual = manifold.project_unchecked(u, residual.matrix());
        let r_r_new = inner(&residual, &residual);
        if libm::sqrt(r_r_new) <= target {
            break;
        }
        let beta = r_r_new / r_r;
        r_r = r_r_new;
        delta = residual.scaled(-1.0).add_scaled(beta, &delta);
        delta = manifold.project_unchecked(u, delta.matrix());
        e_pd = beta * (e_pd + alpha * d_pd);
        d_pd = r_r + beta * beta * d_pd;
    }
    InnerSolution {
        eta,
        hessian_eta,
        hit_boundary: false,
    }
}

/// Riemannian trust-region method.
///
/// The step from truncated CG is accepted when `ρ = actual / predicted`
/// exceeds `rho_prime` and the cost does not increase. The actual change is
/// computed from the difference of the iterates and the cost trace
/// accumulates these changes. The solver stops with `StepTooSmall` once an
/// acceptable step would raise the cost by roundoff. The radius is divided
/// by 4 when `ρ < 1/4` and doubled (capped at `delta_bar`) when `ρ > 3/4` and
/// the inner solver stopped on the boundary.
pub fn solve_tr_with<F>(
    p: &RdaProblem,
    init: &StiefelPoint,
    cfg: &TrConfig,
    mut observe: F,
) -> Result<OptimizationResult>
where
    F: FnMut(&IterationInfo),
{
    let settings = cfg.resolve(p.dim(), p.subspace_dim())?;
    let clock = Stopwatch::start();
    let manifold = p.manifold();

    let mut u = init.clone();
    let mut f = p.cost(&u)?;
    if !f.is_finite() {
        return Err(Error::NonFinite("cost"));
    }
    let mut egrad = p.euclidean_grad_unchecked(&u);
    let mut grad = p.riemannian_grad_from(&u, &egrad);
    let mut grad_norm = manifold.norm_unchecked(&grad);

    let mut cost_trace = vec![f];
    let mut grad_norm_trace = vec![grad_norm];
    observe(&IterationInfo {
        iteration: 0,
        cost: f,
        grad_norm,
    });

    let mut radius = settings.delta0;
    let min_radius = f64::EPSILON * settings.delta_bar;
    let mut termination = Termination::MaxIter;
    let mut iterations = cfg.max_outer_iter;

    for k in 0..cfg.max_outer_iter {
        if grad_norm <= cfg.grad_tol {
            termination = Termination::GradTol;
            iterations = k;
            break;
        }
        if radius < min_radius {
            termination = Termination::StepTooSmall;
            iterations = k;
            break;
        }

        let step = truncated_cg(p, &u, &egrad, &grad, radius, cfg, settings.max_inner);
        let model_change = manifold.inner_unchecked(grad.matrix(), step.eta.matrix())
            + 0.5 * manifold.inner_unchecked(step.hessian_eta.matrix(), step.eta.matrix());
        if !model_change.is_finite() {
            return Err(Error::NonFinite("trust-region model"));
        }
        let predicted = -model_change;

        let candidate = manifold.retract_unchecked(&u, &step.eta).ok();
        let change = candidate.as_ref().map(|c| p.cost_change_unchecked(&u, c));
        if let Some(df) = change {
            if !df.is_finite() {
                return Err(Error::NonFinite("cost"));
            }
        }

        let rho = match change {
            Some(df) if predicted > 0.0 => {
                let reg = 1e3 * f64::EPSILON * f.abs().max(1.0);
                (-df + reg) / (predicted + reg)
            }
            _ => f64::NEG_INFINITY,
        };

        if rho < 0.25 {
            radius /= 4.0;
        } else if rho > 0.75 && step.hit_boundary {
            radius = (2.0 * radius).min(settings.delta_bar);
        }

        if let (Some(next), Some(df)) = (candidate, change) {
            if rho > cfg.rho_prime && df > 0.0 {
                // Only the roundoff allowance made ρ look good: the model
                // decrease is below what the cost can resolve.
                termination = Termination::StepTooSmall;
                iterations = k;
                break;
            }
            if rho > cfg.rho_prime {
                let (next, moved) = settle(manifold, next)?;
                f = if moved { p.cost_unchecked(&next) } else { f + df };
                u = next;
                egrad = p.euclidean_grad_unchecked(&u);
                grad = p.riemannian_grad_from(&u, &egrad);
                grad_norm = manifold.norm_unchecked(&grad);
                if !grad_norm.is_finite() {
                    return Err(Error::NonFinite("gradient"));
                }
            }
        }

        cost_trace.push(f);
        grad_norm_trace.push(grad_norm);
        observe(&IterationInfo {
            iteration: k + 1,
            cost: f,
            grad_norm,
        });
    }
    if termination == Termination::MaxIter && grad_norm <= cfg.grad_tol {
        termination = Termination::GradTol;
    }

    Ok(OptimizationResult {
        point: u,
        cost_trace,
        grad_norm_trace,
        termination,
        iterations,
        wall_time: clock.seconds(),
    })
}
