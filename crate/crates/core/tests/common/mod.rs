#![allow(dead_code)]

use rda_core::nalgebra::DMatrix;

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn jacobi_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut m = a.clone();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += m[(p, q)] * m[(p, q)];
            }
        }
        if off.sqrt() < 1e-15 * m.norm().max(1e-300) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = m[(k, p)];
                    let akq = m[(k, q)];
                    m[(k, p)] = c * akp - s * akq;
                    m[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[(p, k)];
                    let aqk = m[(q, k)];
                    m[(p, k)] = c * apk - s * aqk;
                    m[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
    eig.sort_by(f64::total_cmp);
    eig
}

/// Sum of the `d` smallest eigenvalues.
pub fn smallest_sum(a: &DMatrix<f64>, d: usize) -> f64 {
    jacobi_eigenvalues(a)[..d].iter().sum()
}

/// `L⁻¹ M L⁻ᵀ` for the lower Cholesky factor `L` of `G`, by hand.
pub fn whiten(m: &DMatrix<f64>, g: &DMatrix<f64>) -> DMatrix<f64> {
    let n = g.nrows();
    let mut l = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut s = g[(j, j)];
        for k in 0..j {
            s -= l[(j, k)] * l[(j, k)];
        }
        l[(j, j)] = s.sqrt();
        for i in j + 1..n {
            let mut s = g[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / l[(j, j)];
        }
    }
    let forward = |b: &DMatrix<f64>| {
        let mut x = b.clone();
        for c in 0..b.ncols() {
            for i in 0..n {
                let mut s = b[(i, c)];
                for k in 0..i {
                    s -= l[(i, k)] * x[(k, c)];
                }
                x[(i, c)] = s / l[(i, i)];
            }
        }
        x
    };
    let half = forward(m);
    let full = forward(&half.transpose());
    (&full + full.transpose()) * 0.5
}
