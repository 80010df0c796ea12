mod common;

use rda_core::check::{
    gradient_fd_error, hessian_self_adjointness_with, random_manifold, random_scatter_pair, random_tangent,
};
use rda_core::nalgebra::DMatrix;
use rda_core::{HessianMode, ManifoldKind, ManifoldVariant, RdaProblem, ScatterPair, TangentVector};

fn problem(variant: ManifoldVariant, dim: usize, sub: usize, lambda: f64, seed: u64) -> RdaProblem {
    RdaProblem::new(
        random_scatter_pair(dim, seed),
        random_manifold(variant, dim, seed),
        sub,
        lambda,
    )
    .unwrap()
}

fn size(seed: u64) -> (usize, usize) {
    (5 + (seed % 12) as usize, 1 + (seed % 4) as usize)
}

#[test]
fn gradient_matches_pullback_differences() {
    let mut worst: f64 = 0.0;
    for seed in 0..100 {
        let (dim, sub) = size(seed);
        let variant = ManifoldVariant::ALL[(seed % 4) as usize];
        let p = problem(variant, dim, sub, 0.0, seed);
        let u = p.manifold().random_point(dim, sub, seed + 1000).unwrap();
        let xi = random_tangent(p.manifold(), &u, seed + 2000);
        worst = worst.max(gradient_fd_error(&p, &u, &xi, 1e-6).unwrap());
    }
    assert!(worst <= 1e-5, "worst relative error {worst:e}");
}

#[test]
fn sparse_gradient_matches_differences_away_from_zeros() {
    for seed in 0..20 {
        let (dim, sub) = size(seed);
        let variant = [ManifoldVariant::Stiefel, ManifoldVariant::GeneralizedStiefel][(seed % 2) as usize];
        let p = problem(variant, dim, sub, 0.3, seed);
        let u = p.manifold().random_point(dim, sub, seed + 1000).unwrap();
        let xi = random_tangent(p.manifold(), &u, seed + 2000);
        let err = gradient_fd_error(&p, &u, &xi, 1e-7).unwrap();
        assert!(err <= 1e-5, "seed {seed}: {err:e}");
    }
}

#[test]
fn euclidean_hessian_matches_gradient_differences() {
    for seed in 0..20 {
        let (dim, sub) = size(seed);
        let p = problem(ManifoldVariant::Stiefel, dim, sub, 0.0, seed);
        let u = p.manifold().random_point(dim, sub, seed + 1).unwrap();
        let xi = random_tangent(p.manifold(), &u, seed + 2);
        let t = 1e-6;
        let moved = u.matrix() + xi.matrix() * t;
        // the Euclidean gradient 2MU is defined off the manifold too
        let fd = (p.difference() * &moved * 2.0 - p.euclidean_grad(&u).unwrap()) / t;
        let h = p.euclidean_hess_vec(&u, &xi).unwrap();
        assert!((&fd - &h).norm() <= 1e-6 * h.norm().max(1.0));
    }
}

#[test]
fn identity_scatter_hessian_doubles_the_direction() {
    let scatter = ScatterPair {
        s_w: DMatrix::identity(4, 4),
        s_b: DMatrix::zeros(4, 4),
    };
    let p = RdaProblem::new(scatter, ManifoldKind::stiefel(), 2, 0.0).unwrap();
    let u = p.manifold().random_point(4, 2, 3).unwrap();
    let xi = random_tangent(p.manifold(), &u, 4);
    assert_eq!(p.euclidean_hess_vec(&u, &xi).unwrap(), xi.matrix() * 2.0);
    let zero = TangentVector::zeros(&u);
    assert_eq!(p.euclidean_hess_vec(&u, &zero).unwrap(), DMatrix::zeros(4, 2));
}

#[test]
fn balanced_scatter_is_flat() {
    let s = random_scatter_pair(6, 1).s_w;
    let scatter = ScatterPair { s_w: s.clone(), s_b: s };
    for variant in ManifoldVariant::ALL {
        let p = RdaProblem::new(scatter.clone(), random_manifold(variant, 6, 2), 3, 0.0).unwrap();
        let u = p.manifold().random_point(6, 3, 5).unwrap();
        let xi = random_tangent(p.manifold(), &u, 6);
        assert!(p.riemannian_grad(&u).unwrap().matrix().norm() < 1e-12);
        assert!(p.riemannian_hess_vec(&u, &xi).unwrap().matrix().norm() < 1e-12);
    }
}

#[test]
fn eigenbases_are_stationary() {
    for seed in 0..10 {
        let p = problem(ManifoldVariant::Stiefel, 9, 3, 0.0, seed);
        let eig = p.difference().clone().symmetric_eigen();
        // any three eigenvectors, not only the smallest
        let cols = [(seed % 9) as usize, ((seed + 4) % 9) as usize, ((seed + 7) % 9) as usize];
        let basis = DMatrix::from_fn(9, 3, |i, j| eig.eigenvectors[(i, cols[j])]);
        let u = p.manifold().point(basis).unwrap();
        let g = p.riemannian_grad(&u).unwrap();
        assert!(g.matrix().norm() <= 1e-10 * p.difference().norm().max(1.0));
    }
}

#[test]
fn grassmann_cost_and_gradient_norm_are_rotation_invariant() {
    for seed in 0..20 {
        let variant = [ManifoldVariant::Grassmann, ManifoldVariant::GeneralizedGrassmann][(seed % 2) as usize];
        let p = problem(variant, 8, 3, 0.0, seed);
        let m = p.manifold();
        let u = m.random_point(8, 3, seed + 7).unwrap();
        let q = ManifoldKind::stiefel().random_point(3, 3, seed + 8).unwrap();
        let uq = m.point(u.matrix() * q.matrix()).unwrap();
        assert!((p.cost(&u).unwrap() - p.cost(&uq).unwrap()).abs() <= 1e-10);
        let g = m.norm(&u, &p.riemannian_grad(&u).unwrap()).unwrap();
        let gq = m.norm(&uq, &p.riemannian_grad(&uq).unwrap()).unwrap();
        assert!((g - gq).abs() <= 1e-10);
    }
}

#[test]
fn corrected_hessian_is_self_adjoint() {
    let report = hessian_self_adjointness_with(25, |p, u, xi| {
        p.riemannian_hess_vec(u, xi).map(TangentVector::into_matrix)
    });
    assert!(report.passed(), "{report:?}");
    assert!(report.cases >= 100);
}

#[test]
fn sign_flipped_hessian_is_caught() {
    let report = hessian_self_adjointness_with(10, |p, u, xi| {
        let mut h = p.riemannian_hess_vec(u, xi)?.into_matrix();
        h.row_mut(0).neg_mut();
        Ok(h)
    });
    assert!(!report.passed());
}

#[test]
fn hessian_modes_differ_by_the_curvature_term() {
    for seed in 0..10 {
        let p = problem(ManifoldVariant::ALL[(seed % 4) as usize], 7, 2, 0.0, seed);
        let u = p.manifold().random_point(7, 2, seed + 3).unwrap();
        let xi = random_tangent(p.manifold(), &u, seed + 4);
        let full = p.riemannian_hess_vec(&u, &xi).unwrap();
        let projected = p
            .clone()
            .with_hessian_mode(HessianMode::Projected)
            .riemannian_hess_vec(&u, &xi)
            .unwrap();
        let corr = p.curvature_term(&u, &xi).unwrap();
        let diff = projected.matrix() - full.matrix() - corr.matrix();
        assert!(diff.norm() <= 1e-12 * projected.matrix().norm().max(1.0));
    }
}

#[test]
fn grassmann_rejects_sparsity() {
    let err = RdaProblem::new(random_scatter_pair(5, 0), ManifoldKind::grassmann(), 2, 1e-3);
    assert!(err.is_err());
}

#[test]
fn generalized_minimum_matches_whitened_eigenvalues() {
    for seed in 0..5 {
        let p = problem(ManifoldVariant::GeneralizedStiefel, 12, 3, 0.0, seed);
        let g = p.manifold().metric_matrix().unwrap();
        let bound = common::smallest_sum(&common::whiten(p.difference(), g), 3);
        let init = p.manifold().random_point(12, 3, seed).unwrap();
        let r = rda_core::solve_tr(&p, &init, &Default::default()).unwrap();
        assert!((r.final_cost() - bound).abs() <= 1e-8 * bound.abs().max(1.0), "{} vs {bound}", r.final_cost());
    }
}
