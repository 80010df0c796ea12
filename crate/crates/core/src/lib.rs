//! Discriminant subspace learning on matrix manifolds.
//!
//! The objective `tr(Uᵀ(S_W - S_B)U) + λ‖U‖₁` is minimized over Stiefel,
//! Grassmann and generalized (`UᵀGU = I`) manifolds with a Riemannian
//! conjugate-gradient or trust-region solver. The learned basis is evaluated
//! downstream with k-means (ACC/NMI) and kNN classification.
//!
//! The crate is `no_std` with `alloc`; the default `std` feature only adds
//! wall-clock timing of solver runs.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod check;
pub mod cost;
pub mod datasets;
pub mod error;
pub mod evaluation;
pub mod linalg;
pub mod manifolds;
pub mod optimizers;
pub mod scatter;

pub use cost::{manifold_from_scatter, HessianMode, RdaProblem};
pub use error::{Error, Result};
pub use manifolds::{ManifoldKind, ManifoldVariant, StiefelPoint, TangentVector};
pub use optimizers::{solve_cg, solve_tr, CgConfig, OptimizationResult, Termination, TrConfig};
pub use scatter::{class_means, scatter_matrices, LabeledDataset, ScatterPair};

pub use nalgebra;
