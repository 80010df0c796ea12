//! Command-line interface.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rda_core::check::{run_suite, Suite, SuiteReport};
use rda_core::datasets::synth_gaussian_classes;
use rda_core::evaluation::{mean_std, ClusterScope, ExperimentConfig, FitMethod};
use rda_core::optimizers::{CgBeta, StopNorm};
use rda_core::{HessianMode, ManifoldVariant};

use crate::csv_io::write_csv;
use crate::error::{Error, Result};
use crate::report::{first_difference, DataSource, Report, RunConfig};
use crate::run::{evaluate, write_outputs};

#[derive(Debug, Parser)]
#[command(name = "rda", version, about = "Sparse discriminant subspaces on matrix manifolds")]
pub struct Cli {
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic Gaussian-classes CSV.
    Synth(SynthArgs),
    /// Fit subspaces and evaluate them with k-means and kNN.
    FitEval(Box<FitEvalArgs>),
    /// Run the numerical property suites.
    Check(CheckArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub dim: usize,
    #[arg(long)]
    pub classes: usize,
    #[arg(long)]
    pub per_class: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Distance of the class means from the origin.
    #[arg(long, default_value_t = 4.0)]
    pub spread: f64,
    #[arg(long, default_value_t = 1.0)]
    pub within_std: f64,
    #[arg(long, default_value = "synth.csv")]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SolverArg {
    Tr,
    Cg,
    Lda,
    Raw,
}

impl From<SolverArg> for FitMethod {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::Tr => FitMethod::Tr,
            SolverArg::Cg => FitMethod::Cg,
            SolverArg::Lda => FitMethod::Lda,
            SolverArg::Raw => FitMethod::Raw,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ManifoldArg {
    Stiefel,
    Grassmann,
    GeneralizedStiefel,
    GeneralizedGrassmann,
}

impl From<ManifoldArg> for ManifoldVariant {
    fn from(m: ManifoldArg) -> Self {
        match m {
            ManifoldArg::Stiefel => ManifoldVariant::Stiefel,
            ManifoldArg::Grassmann => ManifoldVariant::Grassmann,
            ManifoldArg::GeneralizedStiefel => ManifoldVariant::GeneralizedStiefel,
            ManifoldArg::GeneralizedGrassmann => ManifoldVariant::GeneralizedGrassmann,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ScopeArg {
    All,
    TestFold,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum HessianArg {
    Corrected,
    Projected,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum BetaArg {
    Fr,
    Pr,
}

#[derive(Debug, Args)]
pub struct FitEvalArgs {
    /// CSV file with one sample per row.
    #[arg(long, conflicts_with_all = ["idx_images", "idx_labels"])]
    pub data: Option<PathBuf>,
    /// 0-based label column of the CSV (default: last).
    #[arg(long, requires = "data")]
    pub label_column: Option<usize>,
    /// The CSV has a header row.
    #[arg(long, requires = "data")]
    pub header: bool,
    #[arg(long, requires = "idx_labels")]
    pub idx_images: Option<PathBuf>,
    #[arg(long, requires = "idx_images")]
    pub idx_labels: Option<PathBuf>,
    /// Downsample IDX images to `HxW`.
    #[arg(long, value_parser = parse_resize, requires = "idx_images")]
    pub resize: Option<(usize, usize)>,

    #[arg(long, value_enum, default_value = "tr")]
    pub solver: SolverArg,
    #[arg(long, value_enum, default_value = "stiefel")]
    pub manifold: ManifoldArg,
    /// Sparsity weight (default 1e-3 for Stiefel kinds with tr/cg, else 0).
    #[arg(long, conflicts_with = "lambda_sweep")]
    pub lambda: Option<f64>,
    /// Comma-separated weights; one output directory per value.
    #[arg(long, value_delimiter = ',')]
    pub lambda_sweep: Option<Vec<f64>>,
    /// Subspace dimension (default C - 1).
    #[arg(long, visible_alias = "dim")]
    pub subspace_dim: Option<usize>,
    #[arg(long, default_value_t = 10)]
    pub repeats: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub knn_k: usize,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long, default_value_t = 10)]
    pub kmeans_restarts: usize,
    #[arg(long, value_enum, default_value = "all")]
    pub cluster_scope: ScopeArg,
    #[arg(long, value_enum, default_value = "corrected")]
    pub hessian: HessianArg,
    #[arg(long, value_enum, default_value = "fr")]
    pub cg_beta: BetaArg,
    /// Stop CG on `‖η‖ ≤ tol` instead of `‖η‖² ≤ tol`.
    #[arg(long)]
    pub unsquared_norm: bool,
    #[arg(long, default_value = "rda-out")]
    pub out: PathBuf,
    /// Worker threads for the repeats.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Also write cost_curve.svg.
    #[arg(long)]
    pub plot: bool,
    /// Rerun the configuration recorded in a report.json and compare.
    #[arg(long)]
    pub replay: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// One of projection, retraction, scatter, gradient, hessian, kyfan.
    #[arg(long, value_parser = parse_suite)]
    pub suite: Option<Suite>,
    #[arg(long, default_value_t = 10)]
    pub seeds: u64,
}

fn parse_resize(s: &str) -> std::result::Result<(usize, usize), String> {
    let (h, w) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected HxW, got {s:?}"))?;
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("{v:?}: {e}"));
    Ok((parse(h)?, parse(w)?))
}

fn parse_suite(s: &str) -> std::result::Result<Suite, String> {
    Suite::from_name(s).ok_or_else(|| {
        let names: Vec<&str> = Suite::ALL.iter().map(|s| s.name()).collect();
        format!("unknown suite {s:?}; expected one of {}", names.join(", "))
    })
}

impl FitEvalArgs {
    pub fn source(&self) -> Result<DataSource> {
        match (&self.data, &self.idx_images, &self.idx_labels) {
            (Some(path), None, None) => Ok(DataSource::Csv {
                path: path.clone(),
                label_column: self.label_column,
                header: self.header,
            }),
            (None, Some(images), Some(labels)) => Ok(DataSource::Idx {
                images: images.clone(),
                labels: labels.clone(),
                resize: self.resize,
            }),
            _ => Err(Error::Config(
                "give either --data or both --idx-images and --idx-labels".into(),
            )),
        }
    }

    pub fn experiment(&self, lambda: Option<f64>) -> ExperimentConfig {
        let manifold = ManifoldVariant::from(self.manifold);
        let solver = FitMethod::from(self.solver);
        let lambda = lambda.unwrap_or(
            if !manifold.is_grassmann() && matches!(solver, FitMethod::Tr | FitMethod::Cg) {
                1e-3
            } else {
                0.0
            },
        );
        let mut cfg = ExperimentConfig {
            manifold,
            solver,
            lambda,
            subspace_dim: self.subspace_dim,
            repeats: self.repeats,
            seed: self.seed,
            knn_k: self.knn_k,
            folds: self.folds,
            kmeans_restarts: self.kmeans_restarts,
            cluster_scope: match self.cluster_scope {
                ScopeArg::All => ClusterScope::AllSamples,
                ScopeArg::TestFold => ClusterScope::TestFold,
            },
            hessian_mode: match self.hessian {
                HessianArg::Corrected => HessianMode::ProjectedWithCorrection,
                HessianArg::Projected => HessianMode::Projected,
            },
            ..ExperimentConfig::default()
        };
        cfg.cg.beta = match self.cg_beta {
            BetaArg::Fr => CgBeta::FletcherReeves,
            BetaArg::Pr => CgBeta::PolakRibiere,
        };
        if self.unsquared_norm {
            cfg.cg.stop_norm = StopNorm::Unsquared;
        }
        cfg
    }
}

/// Runs a parsed command and returns the process exit code.
pub fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Synth(args) => synth(&args),
        Command::FitEval(args) => fit_eval(&args),
        Command::Check(args) => Ok(check(&args)),
    }
}

fn synth(args: &SynthArgs) -> Result<u8> {
    let ds = synth_gaussian_classes(args.dim, args.classes, args.per_class, args.spread, args.within_std, args.seed)?;
    write_csv(&args.out, &ds)?;
    let line = serde_json::json!({
        "dim": ds.dim(),
        "samples": ds.len(),
        "classes": ds.num_classes(),
        "path": args.out,
    });
    println!("{line}");
    Ok(0)
}

fn summary_line(report: &Report, out: &Path) -> String {
    let s = &report.summary;
    serde_json::json!({
        "acc_mean": s.acc_mean,
        "acc_std": s.acc_std,
        "nmi_mean": s.nmi_mean,
        "nmi_std": s.nmi_std,
        "knn_acc_mean": s.knn_acc_mean,
        "knn_acc_std": s.knn_acc_std,
        "lambda": report.config.experiment.lambda,
        "out": out,
    })
    .to_string()
}

fn fit_eval(args: &FitEvalArgs) -> Result<u8> {
    if let Some(recorded_path) = &args.replay {
        let recorded = Report::read(recorded_path)?;
        let (report, outcomes) = evaluate(&recorded.config, args.jobs)?;
        write_outputs(&args.out, &report, &outcomes, args.plot)?;
        if let Some(at) = first_difference(&recorded, &report) {
            return Err(Error::ReplayMismatch(format!("first difference at {at}")));
        }
        println!("{}", summary_line(&report, &args.out));
        return Ok(0);
    }

    let source = args.source()?;
    match &args.lambda_sweep {
        None => {
            let config = RunConfig {
                source,
                experiment: args.experiment(args.lambda),
            };
            let (report, outcomes) = evaluate(&config, args.jobs)?;
            write_outputs(&args.out, &report, &outcomes, args.plot)?;
            println!("{}", summary_line(&report, &args.out));
        }
        Some(lambdas) => {
            if lambdas.is_empty() {
                return Err(Error::Config("--lambda-sweep needs at least one value".into()));
            }
            let mut sweep = String::from("lambda,acc_mean,acc_std,nmi_mean,nmi_std,knn_acc_mean,knn_acc_std,sparsity_mean\n");
            for &lambda in lambdas {
                let config = RunConfig {
                    source: source.clone(),
                    experiment: args.experiment(Some(lambda)),
                };
                let (report, outcomes) = evaluate(&config, args.jobs)?;
                let dir = args.out.join(format!("lambda_{lambda}"));
                write_outputs(&dir, &report, &outcomes, args.plot)?;
                let sparsity: Vec<f64> = report.repeats.iter().filter_map(|r| r.sparsity).collect();
                let sparsity_mean = if sparsity.is_empty() {
                    f64::NAN
                } else {
                    mean_std(sparsity.iter().copied()).0
                };
                let s = &report.summary;
                sweep.push_str(&format!(
                    "{lambda},{},{},{},{},{},{},{sparsity_mean}\n",
                    s.acc_mean, s.acc_std, s.nmi_mean, s.nmi_std, s.knn_acc_mean, s.knn_acc_std
                ));
                println!("{}", summary_line(&report, &dir));
            }
            let path = args.out.join("sweep.csv");
            std::fs::write(&path, sweep).map_err(|e| Error::Io { path, source: e })?;
        }
    }
    Ok(0)
}

fn check(args: &CheckArgs) -> u8 {
    let suites: Vec<Suite> = match args.suite {
        Some(s) => vec![s],
        None => Suite::ALL.to_vec(),
    };
    println!(
        "{:<12} {:<48} {:>6} {:>8} {:>11} {:>10}  status",
        "suite", "property", "cases", "failures", "worst", "tolerance"
    );
    let reports: Vec<SuiteReport> = suites.into_iter().map(|s| run_suite(s, args.seeds)).collect();
    for r in &reports {
        for p in &r.properties {
            println!(
                "{:<12} {:<48} {:>6} {:>8} {:>11.3e} {:>10.1e}  {}",
                r.suite.name(),
                p.name,
                p.cases,
                p.failures,
                p.worst,
                p.tolerance,
                if p.passed() { "ok" } else { "FAIL" }
            );
        }
    }
    let failing: Vec<String> = reports
        .iter()
        .flat_map(|r| {
            r.failing().map(move |p| match &p.first_failure {
                Some(detail) => format!("{}/{}: {detail}", r.suite.name(), p.name),
                None => format!("{}/{}", r.suite.name(), p.name),
            })
        })
        .collect();
    if failing.is_empty() {
        0
    } else {
        for f in &failing {
            eprintln!("failed: {f}");
        }
        1
    }
}
