use nalgebra::{Cholesky, DMatrix, SymmetricEigen};

use crate::error::{contract, Error, Result};
use crate::linalg::sym;
use crate::scatter::ScatterPair;

/// Classical LDA directions: the `d` leading solutions of
/// `S_B v = μ (S_W + εI) v`, normalized so that `Vᵀ(S_W + εI)V = I`.
pub fn lda_basis(scatter: &ScatterPair, subspace_dim: usize) -> Result<DMatrix<f64>> {
    let dim = scatter.dim();
    if subspace_dim == 0 || subspace_dim > dim {
        return Err(contract!("subspace dimension {subspace_dim} outside 1..={dim}"));
    }
    let eps = (1e-8 * scatter.s_w.trace() / dim as f64).max(1e-12);
    let g = sym(&(&scatter.s_w + DMatrix::identity(dim, dim) * eps));
    let chol = Cholesky::new(g).ok_or(Error::NotSpd("regularized within-class scatter"))?;
    let l = chol.l();
    let left = l
        .solve_lower_triangular(&scatter.s_b)
        .ok_or(Error::NotSpd("singular Cholesky factor"))?;
    let whitened = l
        .solve_lower_triangular(&left.transpose())
        .ok_or(Error::NotSpd("singular Cholesky factor"))?;
    let eig = SymmetricEigen::new(sym(&whitened));
    let mut order: alloc::vec::Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let w = eig.eigenvectors.select_columns(&order[..subspace_dim]);
    l.transpose()
        .solve_upper_triangular(&w)
        .ok_or(Error::NotSpd("singular Cholesky factor"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn picks_the_discriminant_axis() {
        let scatter = ScatterPair {
            s_w: DMatrix::identity(3, 3),
            s_b: DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&[0.0, 5.0, 1.0])),
        };
        let v = lda_basis(&scatter, 1).unwrap();
        assert!(v[(1, 0)].abs() > 0.999);
        assert!(lda_basis(&scatter, 4).is_err());
    }
}
