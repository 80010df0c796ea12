use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{contract, Result};

/// Euclidean k-nearest-neighbour majority vote. Ties go to the class with the
/// smallest mean neighbour distance, then to the lowest class index.
pub fn knn_classify(
    train_y: &DMatrix<f64>,
    train_labels: &[usize],
    test_y: &DMatrix<f64>,
    k_neighbors: usize,
) -> Result<Vec<usize>> {
    let n_train = train_y.ncols();
    if train_labels.len() != n_train {
        return Err(contract!(
            "{} training samples but {} labels",
            n_train,
            train_labels.len()
        ));
    }
    if train_y.nrows() != test_y.nrows() {
        return Err(contract!(
            "train features are {}-dimensional but test features are {}-dimensional",
            train_y.nrows(),
            test_y.nrows()
        ));
    }
    if k_neighbors == 0 || k_neighbors > n_train {
        return Err(contract!(
            "kNN needs 1 ≤ k ≤ {n_train} training samples, got k = {k_neighbors}"
        ));
    }
    let classes = train_labels.iter().max().map_or(0, |m| m + 1);
    let mut order: Vec<(f64, usize)> = Vec::with_capacity(n_train);
    let mut predictions = Vec::with_capacity(test_y.ncols());
    for test in test_y.column_iter() {
        order.clear();
        order.extend(train_y.column_iter().enumerate().map(|(i, train)| {
            let d: f64 = train
                .iter()
                .zip(test.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            (libm::sqrt(d), i)
        }));
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        let mut votes = vec![0usize; classes];
        let mut dist_sum = vec![0.0; classes];
        for &(d, i) in &order[..k_neighbors] {
            votes[train_labels[i]] += 1;
            dist_sum[train_labels[i]] += d;
        }
        let mut best = 0;
        for c in 1..classes {
            let better = votes[c] > votes[best]
                || (votes[c] == votes[best]
                    && votes[c] > 0
                    && dist_sum[c] / (votes[c] as f64) < dist_sum[best] / (votes[best] as f64));
            if better {
                best = c;
            }
        }
        predictions.push(best);
    }
    Ok(predictions)
}
