//! Small dense helpers shared by the manifold, cost and evaluation code.

use nalgebra::DMatrix;

/// Symmetric part `(A + Aᵀ) / 2` of a square matrix.
pub fn sym(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

/// Skew part `(A - Aᵀ) / 2`.
pub fn skew(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a - a.transpose()) * 0.5
}

/// Elementwise sign with `sgn(0) = 0`.
pub fn sign(a: &DMatrix<f64>) -> DMatrix<f64> {
    a.map(|v| {
        if v > 0.0 {
            1.0
        } else if v < 0.0 {
            -1.0
        } else {
            0.0
        }
    })
}

/// Mask with ones where the entry is exactly zero.
pub fn zero_mask(a: &DMatrix<f64>) -> DMatrix<f64> {
    a.map(|v| if v == 0.0 { 1.0 } else { 0.0 })
}

pub fn trace_product(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.dot(b)
}

/// Thin QR factor with a non-negative diagonal on `R`.
///
/// Returns `None` when a diagonal entry of `R` is negligible relative to the
/// input, i.e. the columns are numerically dependent.
pub fn qf(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let (rows, cols) = a.shape();
    if cols > rows || cols == 0 {
        return None;
    }
    let scale = a.norm();
    if !scale.is_finite() || scale == 0.0 {
        return None;
    }
    let qr = a.clone().qr();
    let r = qr.r();
    let mut q = qr.q();
    let tol = f64::EPSILON * (rows as f64) * scale;
    for j in 0..cols {
        let rjj = r[(j, j)];
        if rjj.abs() <= tol {
            return None;
        }
        if rjj < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    Some(q)
}

pub fn relative_asymmetry(a: &DMatrix<f64>) -> f64 {
    let n = a.norm();
    if n == 0.0 {
        0.0
    } else {
        (a - a.transpose()).norm() / n
    }
}
