//! Labeled datasets and the within/between-class scatter matrices.
//!
//! ```text
//! S_W = Σ_c Σ_{n∈c} (x_n - x̄_c)(x_n - x̄_c)ᵀ
//! S_B = Σ_c N_c (x̄_c - x̄)(x̄_c - x̄)ᵀ
//! ```
//!
//! Neither matrix is normalized by `N` or `N_c`.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::sym;

/// Column-sample data matrix `X` (`D×N`) with dense class labels `0..C`.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledDataset {
    data: DMatrix<f64>,
    labels: Vec<usize>,
    class_counts: Vec<usize>,
    /// Original label value for each dense class index.
    label_values: Vec<i64>,
}

impl LabeledDataset {
    /// `labels` must already be dense: every index in `0..C` appears.
    pub fn new(data: DMatrix<f64>, labels: Vec<usize>) -> Result<Self> {
        let classes = labels.iter().max().map_or(0, |&m| m + 1);
        let label_values = (0..classes as i64).collect();
        Self::with_label_values(data, labels, label_values)
    }

    /// Densifies arbitrary label values to `0..C` in order of first appearance.
    pub fn from_raw_labels(data: DMatrix<f64>, raw: &[i64]) -> Result<Self> {
        let mut label_values: Vec<i64> = Vec::new();
        let labels = raw
            .iter()
            .map(|value| match label_values.iter().position(|v| v == value) {
                Some(i) => i,
                None => {
                    label_values.push(*value);
                    label_values.len() - 1
                }
            })
            .collect();
        Self::with_label_values(data, labels, label_values)
    }

    pub fn with_label_values(
        data: DMatrix<f64>,
        labels: Vec<usize>,
        label_values: Vec<i64>,
    ) -> Result<Self> {
        if data.ncols() != labels.len() {
            return Err(Error::InvalidDataset(alloc::format!(
                "{} samples but {} labels",
                data.ncols(),
                labels.len()
            )));
        }
        if labels.is_empty() || data.nrows() == 0 {
            return Err(Error::InvalidDataset("dataset is empty".into()));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset("data contains non-finite entries".into()));
        }
        let classes = label_values.len();
        let mut class_counts = vec![0usize; classes];
        for &l in &labels {
            if l >= classes {
                return Err(Error::InvalidDataset(alloc::format!(
                    "label {l} outside 0..{classes}"
                )));
            }
            class_counts[l] += 1;
        }
        if let Some(c) = class_counts.iter().position(|&n| n == 0) {
            return Err(Error::InvalidDataset(alloc::format!("class {c} has no samples")));
        }
        Ok(Self {
            data,
            labels,
            class_counts,
            label_values,
        })
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_counts(&self) -> &[usize] {
        &self.class_counts
    }

    pub fn label_values(&self) -> &[i64] {
        &self.label_values
    }

    /// Ambient dimension `D`.
    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    /// Number of samples `N`.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.class_counts.len()
    }

    /// The samples at `indices`, keeping the class indexing of `self`.
    /// Fails if a class ends up empty.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let data = self.data.select_columns(indices);
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        Self::with_label_values(data, labels, self.label_values.clone())
    }
}

/// Within-class and between-class scatter matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct ScatterPair {
    pub s_w: DMatrix<f64>,
    pub s_b: DMatrix<f64>,
}

impl ScatterPair {
    pub fn dim(&self) -> usize {
        self.s_w.nrows()
    }

    /// `S_W - S_B`.
    pub fn difference(&self) -> DMatrix<f64> {
        &self.s_w - &self.s_b
    }
}

/// Per-class means (`D×C`) and the global mean, accumulated as running
/// means so that identical samples reproduce themselves exactly.
pub fn class_means(ds: &LabeledDataset) -> (DMatrix<f64>, DVector<f64>) {
    let dim = ds.dim();
    let mut means = DMatrix::zeros(dim, ds.num_classes());
    let mut seen = vec![0usize; ds.num_classes()];
    let mut global = DVector::zeros(dim);
    for (j, &l) in ds.labels.iter().enumerate() {
        seen[l] += 1;
        let k = seen[l] as f64;
        let x = ds.data.column(j);
        for i in 0..dim {
            means[(i, l)] += (x[i] - means[(i, l)]) / k;
            global[i] += (x[i] - global[i]) / (j + 1) as f64;
        }
    }
    (means, global)
}

pub fn scatter_matrices(ds: &LabeledDataset) -> ScatterPair {
    let (means, global) = class_means(ds);
    let mut centered = ds.data.clone();
    for (j, &l) in ds.labels.iter().enumerate() {
        let mut col = centered.column_mut(j);
        col -= means.column(l);
    }
    let s_w = sym(&(&centered * centered.transpose()));

    let mut between = means;
    for mut col in between.column_iter_mut() {
        col -= &global;
    }
    let mut weighted = between.clone();
    for (c, &count) in ds.class_counts.iter().enumerate() {
        weighted.column_mut(c).scale_mut(count as f64);
    }
    let s_b = sym(&(&weighted * between.transpose()));
    ScatterPair { s_w, s_b }
}

/// Total scatter `(X - x̄1ᵀ)(X - x̄1ᵀ)ᵀ`.
pub fn total_scatter(ds: &LabeledDataset) -> DMatrix<f64> {
    let (_, global) = class_means(ds);
    let mut centered = ds.data.clone();
    for mut col in centered.column_iter_mut() {
        col -= &global;
    }
    sym(&(&centered * centered.transpose()))
}
