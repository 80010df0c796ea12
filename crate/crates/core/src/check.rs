//! Self-checks of the geometry, the derivatives and the solvers on seeded
//! random problems.
//!
//! Every suite is a list of named properties. A property is evaluated on a
//! number of cases and fails if any case exceeds its tolerance.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::{Cholesky, DMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::cost::RdaProblem;
use crate::error::Result;
use crate::linalg::sym;
use crate::manifolds::{ManifoldKind, ManifoldVariant, StiefelPoint, TangentVector};
use crate::optimizers::{solve_tr, TrConfig};
use crate::scatter::{scatter_matrices, total_scatter, LabeledDataset, ScatterPair};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Suite {
    Projection,
    Retraction,
    Scatter,
    Gradient,
    Hessian,
    KyFan,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Projection,
        Suite::Retraction,
        Suite::Scatter,
        Suite::Gradient,
        Suite::Hessian,
        Suite::KyFan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Projection => "projection",
            Suite::Retraction => "retraction",
            Suite::Scatter => "scatter",
            Suite::Gradient => "gradient",
            Suite::Hessian => "hessian",
            Suite::KyFan => "kyfan",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }
}

/// Outcome of one property over all of its cases.
#[derive(Clone, Debug, PartialEq)]
pub struct PropertyReport {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    /// Largest error seen over all cases.
    pub worst: f64,
    pub tolerance: f64,
    /// Description of the first failing case.
    pub first_failure: Option<String>,
}

impl PropertyReport {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self {
            name,
            cases: 0,
            failures: 0,
            worst: 0.0,
            tolerance,
            first_failure: None,
        }
    }

    fn record(&mut self, error: f64, case: impl FnOnce() -> String) {
        self.cases += 1;
        // NaN counts as a failure.
        if error.is_nan() || error > self.tolerance {
            self.failures += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(case());
            }
        }
        if error.is_nan() || error > self.worst {
            self.worst = error;
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.cases > 0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub properties: Vec<PropertyReport>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.properties.iter().all(PropertyReport::passed)
    }

    pub fn failing(&self) -> impl Iterator<Item = &PropertyReport> {
        self.properties.iter().filter(|p| !p.passed())
    }
}

/// Runs `suite` on seeds `0..seeds`.
pub fn run_suite(suite: Suite, seeds: u64) -> SuiteReport {
    let properties = match suite {
        Suite::Projection => projection_suite(seeds),
        Suite::Retraction => retraction_suite(seeds),
        Suite::Scatter => scatter_suite(seeds),
        Suite::Gradient => gradient_suite(seeds),
        Suite::Hessian => {
            let mut props = alloc::vec![hessian_self_adjointness_with(seeds, |p, u, xi| {
                p.riemannian_hess_vec(u, xi).map(TangentVector::into_matrix)
            })];
            props.extend(hessian_suite(seeds));
            props
        }
        Suite::KyFan => kyfan_suite(seeds),
    };
    SuiteReport { suite, properties }
}

fn gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// Random well-conditioned SPD matrix `AAᵀ/D + I/2`.
pub fn random_spd(dim: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = gaussian(dim, dim, &mut rng);
    sym(&(&a * a.transpose() / dim as f64 + DMatrix::identity(dim, dim) * 0.5))
}

/// `S_W = AAᵀ/D + I/2` and `S_B = BBᵀ/D` for standard-normal `D×D` `A`, `B`.
pub fn random_scatter_pair(dim: usize, seed: u64) -> ScatterPair {
    let s_w = random_spd(dim, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xB5);
    let b = gaussian(dim, dim, &mut rng);
    ScatterPair {
        s_w,
        s_b: sym(&(&b * b.transpose() / dim as f64)),
    }
}

/// Manifold of `variant` whose metric (for generalized variants) is an
/// independent random SPD matrix.
pub fn random_manifold(variant: ManifoldVariant, dim: usize, seed: u64) -> ManifoldKind {
    let metric = variant.is_generalized().then(|| random_spd(dim, seed ^ 0x6E7));
    ManifoldKind::new(variant, metric).expect("random SPD metric is valid")
}

/// Random unit-norm tangent vector at `u`.
pub fn random_tangent(m: &ManifoldKind, u: &StiefelPoint, seed: u64) -> TangentVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (rows, cols) = u.dims();
    let xi = m.project_tangent(u, &gaussian(rows, cols, &mut rng)).expect("valid point");
    let norm = m.norm(u, &xi).expect("valid point");
    xi.scaled(1.0 / norm.max(f64::MIN_POSITIVE))
}

/// Random labeled dataset with `C` classes in `R^D`, every class present.
pub fn random_dataset(dim: usize, classes: usize, samples: usize, seed: u64) -> LabeledDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = gaussian(dim, samples, &mut rng) * 3.0;
    let labels = (0..samples).map(|j| j % classes).collect();
    LabeledDataset::new(data, labels).expect("every class is present")
}

/// Desk-scale sizes varying with the seed.
fn sizes(seed: u64) -> (usize, usize) {
    let dim = 4 + (seed % 5) as usize;
    let sub = 1 + (seed % 3) as usize;
    (dim, sub)
}

fn case(variant: ManifoldVariant, seed: u64) -> String {
    format!("{} seed {seed}", variant.name())
}

fn relative(err: f64, scale: f64) -> f64 {
    err / scale.max(1.0)
}

fn projection_suite(seeds: u64) -> Vec<PropertyReport> {
    let mut idempotent = PropertyReport::new("projection idempotent", 1e-10);
    let mut tangent = PropertyReport::new("projection lands in tangent space", 1e-10);
    let mut self_adjoint = PropertyReport::new("projection self-adjoint in the metric", 1e-10);
    let mut invariance = PropertyReport::new("grassmann projection equivariant", 1e-10);
    for seed in 0..seeds {
        let (dim, sub) = sizes(seed);
        for variant in ManifoldVariant::ALL {
            let m = random_manifold(variant, dim, seed);
            let u = m.random_point(dim, sub, seed).expect("valid sizes");
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9F);
            let z = gaussian(dim, sub, &mut rng);
            let w = gaussian(dim, sub, &mut rng);
            let pz = m.project_tangent(&u, &z).expect("valid point");
            let ppz = m.project_tangent(&u, pz.matrix()).expect("valid point");
            let scale = pz.matrix().norm();
            idempotent.record(relative((ppz.matrix() - pz.matrix()).norm(), scale), || case(variant, seed));
            tangent.record(m.tangency_error(&u, pz.matrix()), || case(variant, seed));
            let pw = m.project_tangent(&u, &w).expect("valid point");
            let lhs = m.ambient_inner(pz.matrix(), &w);
            let rhs = m.ambient_inner(&z, pw.matrix());
            self_adjoint.record(relative((lhs - rhs).abs(), z.norm() * w.norm()), || case(variant, seed));
            if variant.is_grassmann() {
                let q = ManifoldKind::stiefel().random_point(sub, sub, seed ^ 0x51).expect("square");
                let uq = m.point(u.matrix() * q.matrix()).expect("rotation keeps feasibility");
                let lhs = m.project_tangent(&uq, &(&z * q.matrix())).expect("valid point");
                let err = (lhs.matrix() - pz.matrix() * q.matrix()).norm();
                invariance.record(relative(err, scale), || case(variant, seed));
            }
        }
    }
    alloc::vec![idempotent, tangent, self_adjoint, invariance]
}

fn retraction_suite(seeds: u64) -> Vec<PropertyReport> {
    let mut feasible = PropertyReport::new("retraction stays on the manifold", 1e-10);
    let mut centered = PropertyReport::new("retraction of zero is the identity", 1e-12);
    let mut rigid = PropertyReport::new("retraction is first-order rigid", 0.2);
    let mut transport = PropertyReport::new("transport lands in tangent space", 1e-10);
    for seed in 0..seeds {
        let (dim, sub) = sizes(seed);
        for variant in ManifoldVariant::ALL {
            let m = random_manifold(variant, dim, seed);
            let u = m.random_point(dim, sub, seed).expect("valid sizes");
            let xi = random_tangent(&m, &u, seed ^ 0x3A);
            let moved = match m.retract(&u, &xi) {
                Ok(p) => p,
                Err(_) => {
                    feasible.record(f64::INFINITY, || case(variant, seed));
                    continue;
                }
            };
            feasible.record(m.feasibility_error(moved.matrix()), || case(variant, seed));
            let zero = TangentVector::zeros(&u);
            let same = m.retract(&u, &zero).expect("zero step");
            centered.record((same.matrix() - u.matrix()).norm(), || case(variant, seed));
            // ‖R(tξ) - U - tξ‖/t should shrink linearly in t.
            let defect = |t: f64| {
                let r = m.retract(&u, &xi.scaled(t)).expect("small step");
                (r.matrix() - u.matrix() - xi.matrix() * t).norm() / t
            };
            let (coarse, fine) = (defect(1e-2), defect(1e-4));
            let ratio = if coarse < 1e-12 { 0.0 } else { fine / coarse };
            rigid.record(ratio, || format!("{} (ratio {ratio:.3e})", case(variant, seed)));
            let eta = random_tangent(&m, &u, seed ^ 0x77);
            let carried = m.transport(&u, &moved, &eta).expect("valid points");
            transport.record(m.tangency_error(&moved, carried.matrix()), || case(variant, seed));
        }
    }
    alloc::vec![feasible, centered, rigid, transport]
}

fn scatter_suite(seeds: u64) -> Vec<PropertyReport> {
    let mut decomposition = PropertyReport::new("S_W + S_B = S_T", 1e-10);
    let mut permutation = PropertyReport::new("scatter invariant to sample order", 1e-10);
    let mut translation = PropertyReport::new("scatter invariant to translation", 1e-9);
    let mut psd = PropertyReport::new("scatter matrices positive semidefinite", 1e-9);
    for seed in 0..seeds {
        let dim = 2 + (seed % 6) as usize;
        let classes = 2 + (seed % 4) as usize;
        let samples = classes * (2 + (seed % 5) as usize) + (seed % 3) as usize;
        let ds = random_dataset(dim, classes, samples, seed);
        let sc = scatter_matrices(&ds);
        let st = total_scatter(&ds);
        let label = || format!("seed {seed}");
        decomposition.record((&sc.s_w + &sc.s_b - &st).norm() / st.norm().max(1e-300), label);

        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1D);
        let perm = crate::datasets::fisher_yates(samples, &mut rng);
        let shuffled = ds.select(&perm).expect("same classes");
        let sp = scatter_matrices(&shuffled);
        let err = (&sp.s_w - &sc.s_w).norm() + (&sp.s_b - &sc.s_b).norm();
        permutation.record(err / st.norm(), label);

        let shift = gaussian(dim, 1, &mut rng) * 10.0;
        let mut moved = ds.data().clone();
        for mut col in moved.column_iter_mut() {
            col += &shift;
        }
        let moved = LabeledDataset::new(moved, ds.labels().to_vec()).expect("same labels");
        let sm = scatter_matrices(&moved);
        let err = (&sm.s_w - &sc.s_w).norm() + (&sm.s_b - &sc.s_b).norm();
        translation.record(err / st.norm(), label);

        let min_eig = |a: &DMatrix<f64>| a.clone().symmetric_eigen().eigenvalues.min();
        let negative = (-min_eig(&sc.s_w)).max(-min_eig(&sc.s_b)).max(0.0);
        psd.record(negative / st.norm(), label);
    }
    alloc::vec![decomposition, permutation, translation, psd]
}

fn problem(variant: ManifoldVariant, dim: usize, sub: usize, lambda: f64, seed: u64) -> RdaProblem {
    let m = random_manifold(variant, dim, seed);
    RdaProblem::new(random_scatter_pair(dim, seed), m, sub, lambda).expect("valid problem")
}

fn lambdas(variant: ManifoldVariant) -> &'static [f64] {
    if variant.is_grassmann() {
        &[0.0]
    } else {
        &[0.0, 0.05]
    }
}

/// Forward difference `(f(R_U(tξ)) - f(U))/t` against `⟨grad f(U), ξ⟩`,
/// relative to `‖grad f(U)‖ ‖ξ‖`.
pub fn gradient_fd_error(p: &RdaProblem, u: &StiefelPoint, xi: &TangentVector, t: f64) -> Result<f64> {
    let m = p.manifold();
    let fd = (p.cost(&m.retract(u, &xi.scaled(t))?)? - p.cost(u)?) / t;
    let grad = p.riemannian_grad(u)?;
    let exact = m.inner(u, &grad, xi)?;
    let scale = m.norm(u, &grad)? * m.norm(u, xi)?;
    Ok((fd - exact).abs() / scale.max(f64::MIN_POSITIVE))
}

fn gradient_suite(seeds: u64) -> Vec<PropertyReport> {
    let mut fd = PropertyReport::new("gradient matches finite differences", 1e-5);
    let mut tangent = PropertyReport::new("gradient is tangent", 1e-10);
    for seed in 0..seeds {
        let (dim, sub) = sizes(seed);
        for variant in ManifoldVariant::ALL {
            for &lambda in lambdas(variant) {
                let p = problem(variant, dim, sub, lambda, seed);
                let u = p.manifold().random_point(dim, sub, seed ^ 0xAB).expect("valid sizes");
                let xi = random_tangent(p.manifold(), &u, seed ^ 0xCD);
                let label = || format!("{} λ={lambda}", case(variant, seed));
                fd.record(gradient_fd_error(&p, &u, &xi, 1e-6).unwrap_or(f64::INFINITY), label);
                let g = p.riemannian_grad(&u).expect("valid point");
                tangent.record(p.manifold().tangency_error(&u, g.matrix()), label);
            }
        }
    }
    alloc::vec![fd, tangent]
}

/// Self-adjointness `⟨H[ξ], η⟩ = ⟨ξ, H[η]⟩` of a Hessian operator returning
/// ambient matrices, over all manifold variants.
pub fn hessian_self_adjointness_with<F>(seeds: u64, op: F) -> PropertyReport
where
    F: Fn(&RdaProblem, &StiefelPoint, &TangentVector) -> Result<DMatrix<f64>>,
{
    let mut report = PropertyReport::new("hessian self-adjoint", 1e-8);
    for seed in 0..seeds {
        let (dim, sub) = sizes(seed);
        for variant in ManifoldVariant::ALL {
            for &lambda in lambdas(variant) {
                let p = problem(variant, dim, sub, lambda, seed);
                let m = p.manifold();
                let u = m.random_point(dim, sub, seed ^ 0xAB).expect("valid sizes");
                let xi = random_tangent(m, &u, seed ^ 0x11);
                let eta = random_tangent(m, &u, seed ^ 0x22);
                let err = match (op(&p, &u, &xi), op(&p, &u, &eta)) {
                    (Ok(hxi), Ok(heta)) => {
                        (m.ambient_inner(&hxi, eta.matrix()) - m.ambient_inner(xi.matrix(), &heta)).abs()
                    }
                    _ => f64::INFINITY,
                };
                report.record(err, || format!("{} λ={lambda}", case(variant, seed)));
            }
        }
    }
    report
}

fn hessian_suite(seeds: u64) -> Vec<PropertyReport> {
    let mut fd = PropertyReport::new("hessian matches differences of the gradient", 1e-5);
    let mut modes = PropertyReport::new("modes differ by the curvature term", 1e-12);
    for seed in 0..seeds {
        let (dim, sub) = sizes(seed);
        for variant in ManifoldVariant::ALL {
            // The L1 part is only piecewise smooth; check the smooth objective.
            let p = problem(variant, dim, sub, 0.0, seed);
            let m = p.manifold();
            let u = m.random_point(dim, sub, seed ^ 0xAB).expect("valid sizes");
            let xi = random_tangent(m, &u, seed ^ 0x33);
            let label = || case(variant, seed);
            // hess f(U)[ξ] = P_U(d/dt grad f(R_U(tξ)))
            let t = 1e-5;
            let grad_at = |s: f64| {
                let moved = m.retract(&u, &xi.scaled(s)).expect("small step");
                let g = p.riemannian_grad(&moved).expect("valid point");
                m.project_tangent(&u, g.matrix()).expect("valid point").into_matrix()
            };
            let diff = (grad_at(t) - grad_at(-t)) / (2.0 * t);
            let h = p.riemannian_hess_vec(&u, &xi).expect("valid point");
            fd.record(relative((diff - h.matrix()).norm(), h.matrix().norm()), label);

            let projected = p
                .clone()
                .with_hessian_mode(crate::cost::HessianMode::Projected)
                .riemannian_hess_vec(&u, &xi)
                .expect("valid point");
            let corr = p.curvature_term(&u, &xi).expect("valid point");
            let err = (projected.matrix() - corr.matrix() - h.matrix()).norm();
            modes.record(relative(err, projected.matrix().norm()), label);
        }
    }
    alloc::vec![fd, modes]
}

/// Sum of the `d` smallest eigenvalues of `G^{-1/2} M G^{-1/2}` (`G = I`
/// when `metric` is `None`), the minimum of `tr(UᵀMU)` over `UᵀGU = I`.
pub fn ky_fan_bound(m: &DMatrix<f64>, metric: Option<&DMatrix<f64>>, sub: usize) -> f64 {
    let reduced = match metric {
        None => m.clone(),
        Some(g) => {
            let l = Cholesky::new(g.clone()).expect("SPD metric").l();
            let left = l.solve_lower_triangular(m).expect("nonsingular");
            let both = l.solve_lower_triangular(&left.transpose()).expect("nonsingular");
            sym(&both)
        }
    };
    let mut eig: Vec<f64> = reduced.symmetric_eigen().eigenvalues.iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    eig[..sub].iter().sum()
}

fn kyfan_suite(seeds: u64) -> Vec<PropertyReport> {
    let mut tr = PropertyReport::new("trust region reaches the Ky Fan minimum", 1e-6);
    let mut generalized = PropertyReport::new("trust region reaches the generalized minimum", 1e-6);
    let mut stationary = PropertyReport::new("eigenbasis is stationary", 1e-9);
    for seed in 0..seeds {
        let (dim, sub) = (20, 5);
        let label = || format!("seed {seed}");
        let p = problem(ManifoldVariant::Stiefel, dim, sub, 0.0, seed);
        let bound = ky_fan_bound(p.difference(), None, sub);
        let init = p.manifold().random_point(dim, sub, seed).expect("valid sizes");
        let err = solve_tr(&p, &init, &TrConfig::default()).map_or(f64::INFINITY, |r| (r.final_cost() - bound).abs());
        tr.record(err, label);

        let eig = p.difference().clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let basis = DMatrix::from_fn(dim, sub, |i, j| eig.eigenvectors[(i, order[j])]);
        let basis = p.manifold().point(basis).expect("orthonormal eigenvectors");
        let g = p.riemannian_grad(&basis).expect("valid point");
        let scale = p.difference().norm();
        stationary.record(g.matrix().norm() / scale, label);

        let pg = problem(ManifoldVariant::GeneralizedStiefel, dim, sub, 0.0, seed);
        let bound = ky_fan_bound(pg.difference(), pg.manifold().metric_matrix(), sub);
        let init = pg.manifold().random_point(dim, sub, seed).expect("valid sizes");
        let err = solve_tr(&pg, &init, &TrConfig::default())
            .map_or(f64::INFINITY, |r| (r.final_cost() - bound).abs() / bound.abs().max(1.0));
        generalized.record(err, label);
    }
    alloc::vec![tr, generalized, stationary]
}
