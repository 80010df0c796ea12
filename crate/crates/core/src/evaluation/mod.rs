//! Downstream evaluation of a learned subspace: projection, k-means with
//! ACC/NMI, kNN classification and the repeated cross-validation harness.

use nalgebra::DMatrix;

use crate::error::{check_shape, Result};
use crate::manifolds::StiefelPoint;

mod experiment;
mod kmeans;
mod knn;
mod lda;
mod metrics;

pub use experiment::{
    aggregate, fit_subspace, run_experiment, run_repeat, validate_experiment, ClusterScope,
    EvaluationReport, ExperimentConfig, FitMethod, FittedSubspace, RepeatOutcome,
};
pub use kmeans::{kmeans, kmeans_detailed, KMeansResult};
pub use knn::knn_classify;
pub use lda::lda_basis;
pub use metrics::{clustering_accuracy, hungarian_max, nmi};

/// `Y = UᵀX`.
pub fn project_features(u: &StiefelPoint, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    project_with_basis(u.matrix(), x)
}

pub fn project_with_basis(basis: &DMatrix<f64>, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_shape(
        "feature projection",
        (basis.nrows(), x.ncols()),
        (x.nrows(), x.ncols()),
    )?;
    Ok(basis.transpose() * x)
}

/// Fraction of entries with magnitude below `threshold`.
pub fn small_entry_fraction(u: &DMatrix<f64>, threshold: f64) -> f64 {
    if u.is_empty() {
        return 0.0;
    }
    u.iter().filter(|v| v.abs() < threshold).count() as f64 / u.len() as f64
}

/// Mean and population standard deviation.
pub fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = values.clone().sum::<f64>() / n as f64;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    (mean, libm::sqrt(var.max(0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifolds::ManifoldKind;

    #[test]
    fn small_entries_are_counted() {
        let u = DMatrix::from_row_slice(2, 2, &[1e-4, -0.5, -1e-3, 0.0]);
        assert_eq!(small_entry_fraction(&u, 1e-3), 0.5);
    }

    #[test]
    fn identity_basis_selects_rows() {
        let m = ManifoldKind::stiefel();
        let u = m.point(DMatrix::identity(4, 2)).unwrap();
        let x = DMatrix::from_fn(4, 3, |i, j| (i * 3 + j) as f64);
        let y = project_features(&u, &x).unwrap();
        assert_eq!(y, x.rows(0, 2).into_owned());
    }

    #[test]
    fn projecting_the_basis_gives_identity() {
        let m = ManifoldKind::stiefel();
        let u = m.random_point(6, 3, 2).unwrap();
        let y = project_features(&u, u.matrix()).unwrap();
        assert!((y - DMatrix::<f64>::identity(3, 3)).norm() < 1e-12);
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let m = ManifoldKind::stiefel();
        let u = m.random_point(6, 3, 2).unwrap();
        assert!(project_features(&u, &DMatrix::zeros(5, 2)).is_err());
    }

    #[test]
    fn mean_std_of_constant() {
        let v = [0.5, 0.5, 0.5];
        assert_eq!(mean_std(v.iter().copied()), (0.5, 0.0));
        let (m, s) = mean_std([1.0, 3.0].iter().copied());
        assert_eq!((m, s), (2.0, 1.0));
    }
}
