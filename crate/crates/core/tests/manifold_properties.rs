use proptest::prelude::*;
use proptest::test_runner::RngSeed;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rda_core::check::{random_manifold, random_tangent};
use rda_core::nalgebra::DMatrix;
use rda_core::{ManifoldKind, ManifoldVariant, StiefelPoint, TangentVector};

fn setup(variant: usize, dim: usize, sub: usize, seed: u64) -> (ManifoldKind, StiefelPoint) {
    // D > d keeps the Grassmann horizontal space nontrivial
    let sub = sub.min(dim - 1);
    let m = random_manifold(ManifoldVariant::ALL[variant], dim, seed);
    let u = m.random_point(dim, sub, seed.wrapping_add(0x9E37_79B9_7F4A_7C15)).unwrap();
    (m, u)
}

fn ambient(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(&mut rng))
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 64,
        failure_persistence: None,
        rng_seed: RngSeed::Fixed(0x5EED),
        ..ProptestConfig::default()
    })]

    #[test]
    fn projection_is_idempotent(variant in 0usize..4, dim in 2usize..9, sub in 1usize..5, seed in any::<u64>()) {
        let (m, u) = setup(variant, dim, sub, seed);
        let z = ambient(dim, u.dims().1, seed);
        let once = m.project_tangent(&u, &z).unwrap();
        let twice = m.project_tangent(&u, once.matrix()).unwrap();
        prop_assert!((twice.matrix() - once.matrix()).norm() <= 1e-10 * once.matrix().norm().max(1.0));
        prop_assert!(m.tangency_error(&u, once.matrix()) <= 1e-10);
    }

    #[test]
    fn retraction_stays_feasible(variant in 0usize..4, dim in 2usize..9, sub in 1usize..5, seed in any::<u64>(), t in 0.0f64..3.0) {
        let (m, u) = setup(variant, dim, sub, seed);
        let xi = random_tangent(&m, &u, seed ^ 1).scaled(t);
        let r = m.retract(&u, &xi).unwrap();
        prop_assert!(m.feasibility_error(r.matrix()) <= 1e-10);
    }

    #[test]
    fn retraction_is_centered_and_rigid(variant in 0usize..4, dim in 2usize..9, sub in 1usize..5, seed in any::<u64>()) {
        let (m, u) = setup(variant, dim, sub, seed);
        let zero = TangentVector::zeros(&u);
        prop_assert!((m.retract(&u, &zero).unwrap().matrix() - u.matrix()).norm() <= 1e-12);
        let xi = random_tangent(&m, &u, seed ^ 2);
        let defect = |t: f64| {
            let r = m.retract(&u, &xi.scaled(t)).unwrap();
            (r.matrix() - u.matrix() - xi.matrix() * t).norm() / t
        };
        let (a, b, c) = (defect(1e-2), defect(1e-3), defect(1e-4));
        // second-order agreement: the defect over t shrinks roughly tenfold per decade
        prop_assert!(b <= 0.2 * a + 1e-9, "{a} {b}");
        prop_assert!(c <= 0.2 * b + 1e-9, "{b} {c}");
    }

    #[test]
    fn metric_is_symmetric_and_positive(variant in 0usize..4, dim in 2usize..9, sub in 1usize..5, seed in any::<u64>()) {
        let (m, u) = setup(variant, dim, sub, seed);
        let xi = random_tangent(&m, &u, seed ^ 3);
        let eta = random_tangent(&m, &u, seed ^ 4);
        let a = m.inner(&u, &xi, &eta).unwrap();
        let b = m.inner(&u, &eta, &xi).unwrap();
        prop_assert!((a - b).abs() <= 1e-12);
        let n = m.norm(&u, &xi).unwrap();
        prop_assert!((n - 1.0).abs() <= 1e-12, "{n}");
    }

    #[test]
    fn transport_lands_in_target_tangent_space(variant in 0usize..4, dim in 2usize..9, sub in 1usize..5, seed in any::<u64>()) {
        let (m, u) = setup(variant, dim, sub, seed);
        let step = random_tangent(&m, &u, seed ^ 5).scaled(0.5);
        let v = m.retract(&u, &step).unwrap();
        let eta = random_tangent(&m, &u, seed ^ 6);
        let moved = m.transport(&u, &v, &eta).unwrap();
        prop_assert!(m.tangency_error(&v, moved.matrix()) <= 1e-10);
        // transporting to the same point is the identity
        let same = m.transport(&u, &u, &eta).unwrap();
        prop_assert!((same.matrix() - eta.matrix()).norm() <= 1e-10);
    }

    #[test]
    fn grassmann_projection_is_rotation_equivariant(generalized in any::<bool>(), dim in 2usize..9, sub in 1usize..5, seed in any::<u64>()) {
        let variant = if generalized { 3 } else { 1 };
        let (m, u) = setup(variant, dim, sub, seed);
        let d = u.dims().1;
        let q = ManifoldKind::stiefel().random_point(d, d, seed ^ 7).unwrap();
        let uq = m.point(u.matrix() * q.matrix()).unwrap();
        let z = ambient(dim, d, seed);
        let lhs = m.project_tangent(&uq, &(&z * q.matrix())).unwrap();
        let rhs = m.project_tangent(&u, &z).unwrap().into_matrix() * q.matrix();
        prop_assert!((lhs.matrix() - &rhs).norm() <= 1e-10 * rhs.norm().max(1.0));
    }
}

#[test]
fn grassmann_tangents_are_horizontal() {
    let m = random_manifold(ManifoldVariant::GeneralizedGrassmann, 6, 9);
    let u = m.random_point(6, 3, 10).unwrap();
    let xi = random_tangent(&m, &u, 11);
    let g = m.metric_matrix().unwrap();
    let vertical = u.matrix().transpose() * g * xi.matrix();
    assert!(vertical.norm() < 1e-12);
}

#[test]
fn stiefel_tangents_are_skew_constrained() {
    let m = ManifoldKind::stiefel();
    let u = m.random_point(7, 3, 1).unwrap();
    let xi = random_tangent(&m, &u, 2);
    let s = u.matrix().transpose() * xi.matrix();
    assert!((&s + s.transpose()).norm() < 1e-12);
    assert!(m.tangent(&u, u.matrix().clone()).is_err());
}

#[test]
fn infeasible_points_are_rejected() {
    let m = ManifoldKind::stiefel();
    assert!(m.point(DMatrix::from_element(3, 1, 1.0)).is_err());
    let g = DMatrix::from_diagonal_element(3, 3, 4.0);
    let gm = ManifoldKind::generalized_stiefel(g).unwrap();
    // unit columns are not G-orthonormal for G = 4I
    assert!(gm.point(DMatrix::identity(3, 2)).is_err());
    assert!(gm.point(DMatrix::identity(3, 2) * 0.5).is_ok());
}

