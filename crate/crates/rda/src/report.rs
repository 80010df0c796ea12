//! `report.json`, `report.csv` and the per-repeat trace files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rda_core::evaluation::{small_entry_fraction, EvaluationReport, ExperimentConfig, RepeatOutcome};
use rda_core::optimizers::Termination;
use rda_core::OptimizationResult;
use serde::{Deserialize, Serialize};
use sha1::{Digest, Sha1};

use crate::error::{Error, Result};

pub const SCHEMA: u32 = 1;

/// Entries of a fitted basis below this magnitude count as zero.
pub const SPARSITY_THRESHOLD: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DataSource {
    Csv {
        path: PathBuf,
        /// 0-based; `None` means the last column.
        label_column: Option<usize>,
        header: bool,
    },
    Idx {
        images: PathBuf,
        labels: PathBuf,
        /// Target `(height, width)` for bilinear downsampling.
        resize: Option<(usize, usize)>,
    },
}

impl DataSource {
    pub fn paths(&self) -> Vec<&Path> {
        match self {
            DataSource::Csv { path, .. } => vec![path.as_path()],
            DataSource::Idx { images, labels, .. } => vec![images.as_path(), labels.as_path()],
        }
    }
}

/// Everything needed to rerun an evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub source: DataSource,
    pub experiment: ExperimentConfig,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputHash {
    pub path: PathBuf,
    /// SHA-1 of `"blob <len>\0" + contents`, as `git hash-object` computes it.
    pub git_blob_sha1: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub acc_mean: f64,
    pub acc_std: f64,
    pub nmi_mean: f64,
    pub nmi_std: f64,
    pub knn_acc_mean: f64,
    pub knn_acc_std: f64,
    pub repeats: usize,
}

impl From<&EvaluationReport> for Summary {
    fn from(r: &EvaluationReport) -> Self {
        Self {
            acc_mean: r.acc_mean,
            acc_std: r.acc_std,
            nmi_mean: r.nmi_mean,
            nmi_std: r.nmi_std,
            knn_acc_mean: r.knn_acc_mean,
            knn_acc_std: r.knn_acc_std,
            repeats: r.repeats,
        }
    }
}

/// Per-repeat metrics plus the solver run behind the clustering fit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepeatRecord {
    pub repeat: usize,
    pub acc: f64,
    pub nmi: f64,
    pub knn_acc: f64,
    pub final_cost: Option<f64>,
    pub final_grad_norm: Option<f64>,
    pub iterations: Option<usize>,
    pub termination: Option<Termination>,
    /// Fraction of basis entries below [`SPARSITY_THRESHOLD`] in magnitude.
    pub sparsity: Option<f64>,
}

impl From<&RepeatOutcome> for RepeatRecord {
    fn from(o: &RepeatOutcome) -> Self {
        let fit = o.fit.as_ref();
        Self {
            repeat: o.repeat,
            acc: o.acc,
            nmi: o.nmi,
            knn_acc: o.knn_acc,
            final_cost: fit.map(OptimizationResult::final_cost),
            final_grad_norm: fit.map(OptimizationResult::final_grad_norm),
            iterations: fit.map(|f| f.iterations),
            termination: fit.map(|f| f.termination),
            sparsity: fit.map(|f| small_entry_fraction(f.point.matrix(), SPARSITY_THRESHOLD)),
        }
    }
}

/// Contents of `report.json`. Wall-clock times are left out so that
/// identical runs give identical files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub tool: String,
    pub config: RunConfig,
    pub inputs: Vec<InputHash>,
    pub summary: Summary,
    pub repeats: Vec<RepeatRecord>,
}

impl Report {
    pub fn new(config: RunConfig, inputs: Vec<InputHash>, evaluation: &EvaluationReport, outcomes: &[RepeatOutcome]) -> Self {
        let mut repeats: Vec<RepeatRecord> = outcomes.iter().map(RepeatRecord::from).collect();
        repeats.sort_by_key(|r| r.repeat);
        Self {
            schema: SCHEMA,
            tool: format!("rda {}", env!("CARGO_PKG_VERSION")),
            config,
            inputs,
            summary: Summary::from(evaluation),
            repeats,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let report: Report = serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        if report.schema != SCHEMA {
            return Err(Error::Config(format!(
                "{}: schema {} is not supported (expected {SCHEMA})",
                path.display(),
                report.schema
            )));
        }
        Ok(report)
    }

    /// One row per repeat: `repeat,acc,nmi,knn`.
    pub fn repeats_csv(&self) -> String {
        let mut out = String::from("repeat,acc,nmi,knn\n");
        for r in &self.repeats {
            writeln!(out, "{},{},{},{}", r.repeat, r.acc, r.nmi, r.knn_acc).expect("writing to a String");
        }
        out
    }
}

pub fn git_blob_sha1(contents: &[u8]) -> String {
    let mut hasher = Sha1::new();
    hasher.update(format!("blob {}\0", contents.len()).as_bytes());
    hasher.update(contents);
    hasher.finalize().iter().fold(String::with_capacity(40), |mut s, b| {
        write!(s, "{b:02x}").expect("writing to a String");
        s
    })
}

pub fn hash_inputs(source: &DataSource) -> Result<Vec<InputHash>> {
    source
        .paths()
        .into_iter()
        .map(|path| {
            let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
            Ok(InputHash {
                path: path.to_path_buf(),
                git_blob_sha1: git_blob_sha1(&bytes),
            })
        })
        .collect()
}

/// `iteration,cost,grad_norm` for every solver iteration.
pub fn trace_csv(fit: &OptimizationResult) -> String {
    let mut out = String::from("iteration,cost,grad_norm\n");
    for (i, (c, g)) in fit.cost_trace.iter().zip(&fit.grad_norm_trace).enumerate() {
        writeln!(out, "{i},{c},{g}").expect("writing to a String");
    }
    out
}

pub fn trace_file_name(repeat: usize) -> String {
    format!("trace_{repeat}.csv")
}

/// JSON pointer of the first difference between two reports, if any.
pub fn first_difference(a: &Report, b: &Report) -> Option<String> {
    fn walk(a: &serde_json::Value, b: &serde_json::Value, at: &mut String) -> bool {
        use serde_json::Value;
        match (a, b) {
            (Value::Object(x), Value::Object(y)) => {
                if x.len() != y.len() {
                    return true;
                }
                for (k, v) in x {
                    let len = at.len();
                    at.push('/');
                    at.push_str(k);
                    match y.get(k) {
                        Some(w) if !walk(v, w, at) => at.truncate(len),
                        _ => return true,
                    }
                }
                false
            }
            (Value::Array(x), Value::Array(y)) => {
                if x.len() != y.len() {
                    return true;
                }
                for (i, (v, w)) in x.iter().zip(y).enumerate() {
                    let len = at.len();
                    write!(at, "/{i}").expect("writing to a String");
                    if walk(v, w, at) {
                        return true;
                    }
                    at.truncate(len);
                }
                false
            }
            _ => a != b,
        }
    }
    let a = serde_json::to_value(a).expect("report serializes");
    let b = serde_json::to_value(b).expect("report serializes");
    let mut at = String::new();
    walk(&a, &b, &mut at).then(|| if at.is_empty() { "/".to_string() } else { at })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blob_hash_matches_git() {
        // git hash-object /dev/null and of "hello\n"
        assert_eq!(git_blob_sha1(b""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
        assert_eq!(git_blob_sha1(b"hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
    }
}
