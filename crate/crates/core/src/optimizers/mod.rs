//! Riemannian conjugate-gradient and trust-region solvers.

use alloc::vec::Vec;

use crate::error::Result;
use crate::manifolds::{ManifoldKind, StiefelPoint};

mod cg;
mod tr;

pub use cg::{solve_cg, solve_cg_with, CgBeta, CgConfig, StopNorm};
pub use tr::{solve_tr, solve_tr_with, TrConfig};

/// Iterates drifting further than this from the manifold are re-orthonormalized.
pub const DRIFT_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(rename_all = "kebab-case")
)]
pub enum Termination {
    GradTol,
    MaxIter,
    StepTooSmall,
}

/// Passed to the per-iteration observer.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationInfo {
    pub iteration: usize,
    pub cost: f64,
    pub grad_norm: f64,
}

#[derive(Clone, Debug)]
pub struct OptimizationResult {
    pub point: StiefelPoint,
    /// Cost at the initial point followed by one entry per iteration.
    pub cost_trace: Vec<f64>,
    /// Riemannian gradient norms aligned with `cost_trace`.
    pub grad_norm_trace: Vec<f64>,
    pub termination: Termination,
    pub iterations: usize,
    /// Seconds; zero without the `std` feature.
    pub wall_time: f64,
}

impl OptimizationResult {
    pub fn final_cost(&self) -> f64 {
        *self.cost_trace.last().expect("trace holds the initial cost")
    }

    pub fn final_grad_norm(&self) -> f64 {
        *self.grad_norm_trace.last().expect("trace holds the initial gradient")
    }
}

pub(crate) struct Stopwatch {
    #[cfg(feature = "std")]
    start: std::time::Instant,
}

impl Stopwatch {
    pub(crate) fn start() -> Self {
        Self {
            #[cfg(feature = "std")]
            start: std::time::Instant::now(),
        }
    }

    pub(crate) fn seconds(&self) -> f64 {
        #[cfg(feature = "std")]
        {
            self.start.elapsed().as_secs_f64()
        }
        #[cfg(not(feature = "std"))]
        {
            0.0
        }
    }
}

/// Returns the iterate, re-orthonormalized if it drifted, and whether it changed.
pub(crate) fn settle(manifold: &ManifoldKind, point: StiefelPoint) -> Result<(StiefelPoint, bool)> {
    let drift = manifold.feasibility_error(point.matrix());
    if drift > DRIFT_TOL {
        log::warn!("iterate drifted {drift:e} off the manifold; re-orthonormalizing");
        Ok((manifold.reorthonormalize(&point)?, true))
    } else {
        Ok((point, false))
    }
}
