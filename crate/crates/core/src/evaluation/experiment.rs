use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cost::{manifold_from_scatter, HessianMode, RdaProblem};
use crate::datasets::fisher_yates;
use crate::error::{Error, Result};
use crate::manifolds::ManifoldVariant;
use crate::optimizers::{solve_cg, solve_tr, CgConfig, OptimizationResult, TrConfig};
use crate::scatter::{scatter_matrices, LabeledDataset};

use super::{clustering_accuracy, kmeans, knn_classify, lda_basis, mean_std, nmi, project_with_basis};

/// How the subspace is obtained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(rename_all = "kebab-case")
)]
pub enum FitMethod {
    /// Riemannian trust region.
    #[default]
    Tr,
    /// Riemannian conjugate gradient.
    Cg,
    /// Euclidean LDA via the generalized eigenproblem.
    Lda,
    /// No projection: evaluate on the raw features.
    Raw,
}

/// Which samples k-means clusters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(rename_all = "kebab-case")
)]
pub enum ClusterScope {
    /// Fit on every sample, then cluster every sample.
    #[default]
    AllSamples,
    /// Cluster the held-out samples of the first fold, projected with the
    /// subspace fitted on the remaining folds.
    TestFold,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExperimentConfig {
    pub manifold: ManifoldVariant,
    pub solver: FitMethod,
    pub lambda: f64,
    /// Defaults to `C - 1` (at least 1).
    pub subspace_dim: Option<usize>,
    pub repeats: usize,
    pub seed: u64,
    pub knn_k: usize,
    pub folds: usize,
    pub kmeans_restarts: usize,
    pub cluster_scope: ClusterScope,
    pub hessian_mode: HessianMode,
    pub cg: CgConfig,
    pub tr: TrConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            manifold: ManifoldVariant::Stiefel,
            solver: FitMethod::Tr,
            lambda: 0.0,
            subspace_dim: None,
            repeats: 10,
            seed: 0,
            knn_k: 1,
            folds: 5,
            kmeans_restarts: 10,
            cluster_scope: ClusterScope::AllSamples,
            hessian_mode: HessianMode::ProjectedWithCorrection,
            cg: CgConfig::default(),
            tr: TrConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn resolved_subspace_dim(&self, ds: &LabeledDataset) -> usize {
        self.subspace_dim
            .unwrap_or_else(|| ds.num_classes().saturating_sub(1).max(1))
    }
}

/// Aggregated metrics over all repeats.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvaluationReport {
    pub acc_mean: f64,
    pub acc_std: f64,
    pub nmi_mean: f64,
    pub nmi_std: f64,
    pub knn_acc_mean: f64,
    pub knn_acc_std: f64,
    pub repeats: usize,
    pub config_echo: ExperimentConfig,
}

/// Metrics of one repeat plus the solver run behind its clustering fit.
#[derive(Clone, Debug)]
pub struct RepeatOutcome {
    pub repeat: usize,
    pub acc: f64,
    pub nmi: f64,
    pub knn_acc: f64,
    pub fit: Option<OptimizationResult>,
}

/// A fitted basis (`None` for raw features) and the solver run, if any.
#[derive(Clone, Debug)]
pub struct FittedSubspace {
    pub basis: Option<DMatrix<f64>>,
    pub optimization: Option<OptimizationResult>,
}

impl FittedSubspace {
    pub fn project(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        match &self.basis {
            Some(b) => project_with_basis(b, x),
            None => Ok(x.clone()),
        }
    }
}

fn mix(seed: u64, stream: u64) -> u64 {
    // splitmix64 finalizer over a combined state
    let mut z = seed ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn validate_experiment(ds: &LabeledDataset, cfg: &ExperimentConfig) -> Result<()> {
    let config = |msg: alloc::string::String| Err(Error::Config(msg));
    if ds.num_classes() < 2 {
        return config("at least two classes are required".to_string());
    }
    if cfg.repeats == 0 {
        return config("repeats must be at least 1".to_string());
    }
    if cfg.folds < 2 {
        return config(alloc::format!("need at least 2 folds, got {}", cfg.folds));
    }
    let smallest = ds.class_counts().iter().copied().min().unwrap_or(0);
    if smallest < cfg.folds {
        return config(alloc::format!(
            "smallest class has {smallest} samples, fewer than the {} folds",
            cfg.folds
        ));
    }
    let d = cfg.resolved_subspace_dim(ds);
    if d == 0 || d > ds.dim() {
        return config(alloc::format!(
            "subspace dimension {d} outside 1..={}",
            ds.dim()
        ));
    }
    if !(cfg.lambda.is_finite() && cfg.lambda >= 0.0) {
        return config(alloc::format!("lambda must be finite and ≥ 0, got {}", cfg.lambda));
    }
    if cfg.lambda > 0.0 && cfg.manifold.is_grassmann() {
        return config("lambda > 0 requires a Stiefel variant".to_string());
    }
    let smallest_train = ds.len() - ds.len().div_ceil(cfg.folds);
    if cfg.knn_k == 0 || cfg.knn_k > smallest_train {
        return config(alloc::format!(
            "knn k = {} must lie in 1..={smallest_train}",
            cfg.knn_k
        ));
    }
    if cfg.kmeans_restarts == 0 {
        return config("k-means restarts must be at least 1".to_string());
    }
    cfg.cg.validate()?;
    Ok(())
}

/// Fits a subspace on `train` with the configured method.
pub fn fit_subspace(train: &LabeledDataset, cfg: &ExperimentConfig, init_seed: u64) -> Result<FittedSubspace> {
    let d = cfg.resolved_subspace_dim(train);
    let scatter = scatter_matrices(train);
    match cfg.solver {
        FitMethod::Raw => Ok(FittedSubspace {
            basis: None,
            optimization: None,
        }),
        FitMethod::Lda => Ok(FittedSubspace {
            basis: Some(lda_basis(&scatter, d)?),
            optimization: None,
        }),
        FitMethod::Tr | FitMethod::Cg => {
            let manifold = manifold_from_scatter(cfg.manifold, &scatter)?;
            let init = manifold.random_point(train.dim(), d, init_seed)?;
            let problem =
                RdaProblem::new(scatter, manifold, d, cfg.lambda)?.with_hessian_mode(cfg.hessian_mode);
            let result = match cfg.solver {
                FitMethod::Tr => solve_tr(&problem, &init, &cfg.tr)?,
                _ => solve_cg(&problem, &init, &cfg.cg)?,
            };
            Ok(FittedSubspace {
                basis: Some(result.point.matrix().clone()),
                optimization: Some(result),
            })
        }
    }
}

/// Stratified fold index for every sample, following the order in `perm`.
fn stratified_folds(ds: &LabeledDataset, perm: &[usize], folds: usize) -> Vec<usize> {
    let mut next = vec![0usize; ds.num_classes()];
    let mut fold_of = vec![0usize; ds.len()];
    for &i in perm {
        let c = ds.labels()[i];
        fold_of[i] = next[c] % folds;
        next[c] += 1;
    }
    fold_of
}

/// One repeat: shuffle, K-fold kNN evaluation, and k-means ACC/NMI.
pub fn run_repeat(ds: &LabeledDataset, cfg: &ExperimentConfig, repeat: usize) -> Result<RepeatOutcome> {
    let repeat_seed = mix(cfg.seed, repeat as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(repeat_seed);
    let perm = fisher_yates(ds.len(), &mut rng);
    let fold_of = stratified_folds(ds, &perm, cfg.folds);

    let mut correct = 0usize;
    let mut first_fold = None;
    for fold in 0..cfg.folds {
        let train_idx: Vec<usize> = perm.iter().copied().filter(|&i| fold_of[i] != fold).collect();
        let test_idx: Vec<usize> = perm.iter().copied().filter(|&i| fold_of[i] == fold).collect();
        let train = ds.select(&train_idx)?;
        let test = ds.select(&test_idx)?;
        let fitted = fit_subspace(&train, cfg, mix(repeat_seed, fold as u64 + 1))?;
        let train_y = fitted.project(train.data())?;
        let test_y = fitted.project(test.data())?;
        let predicted = knn_classify(&train_y, train.labels(), &test_y, cfg.knn_k)?;
        correct += predicted
            .iter()
            .zip(test.labels())
            .filter(|(p, t)| p == t)
            .count();
        if fold == 0 {
            first_fold = Some((fitted, test_y, test));
        }
    }
    let knn_acc = correct as f64 / ds.len() as f64;

    let kmeans_seed = mix(repeat_seed, u64::MAX);
    let (fit, features, truth) = match cfg.cluster_scope {
        ClusterScope::AllSamples => {
            let shuffled = ds.select(&perm)?;
            let fitted = fit_subspace(&shuffled, cfg, mix(repeat_seed, 0))?;
            let y = fitted.project(shuffled.data())?;
            (fitted.optimization, y, shuffled.labels().to_vec())
        }
        ClusterScope::TestFold => {
            let (fitted, test_y, test) = first_fold.expect("at least two folds");
            (fitted.optimization, test_y, test.labels().to_vec())
        }
    };
    let assignment = kmeans(&features, ds.num_classes(), cfg.kmeans_restarts, kmeans_seed)?;
    Ok(RepeatOutcome {
        repeat,
        acc: clustering_accuracy(&assignment, &truth)?,
        nmi: nmi(&assignment, &truth)?,
        knn_acc,
        fit,
    })
}

/// Mean and standard deviation over repeats, reduced in repeat order.
pub fn aggregate(outcomes: &[RepeatOutcome], cfg: &ExperimentConfig) -> EvaluationReport {
    let mut sorted: Vec<&RepeatOutcome> = outcomes.iter().collect();
    sorted.sort_by_key(|o| o.repeat);
    let (acc_mean, acc_std) = mean_std(sorted.iter().map(|o| o.acc));
    let (nmi_mean, nmi_std) = mean_std(sorted.iter().map(|o| o.nmi));
    let (knn_acc_mean, knn_acc_std) = mean_std(sorted.iter().map(|o| o.knn_acc));
    EvaluationReport {
        acc_mean,
        acc_std,
        nmi_mean,
        nmi_std,
        knn_acc_mean,
        knn_acc_std,
        repeats: sorted.len(),
        config_echo: cfg.clone(),
    }
}

/// Runs every repeat sequentially and aggregates the metrics.
pub fn run_experiment(ds: &LabeledDataset, cfg: &ExperimentConfig) -> Result<(EvaluationReport, Vec<RepeatOutcome>)> {
    validate_experiment(ds, cfg)?;
    let outcomes = (0..cfg.repeats)
        .map(|r| run_repeat(ds, cfg, r))
        .collect::<Result<Vec<_>>>()?;
    Ok((aggregate(&outcomes, cfg), outcomes))
}
