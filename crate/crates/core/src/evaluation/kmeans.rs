use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{contract, Result};

const MAX_LLOYD_ITERATIONS: usize = 300;

#[derive(Clone, Debug, PartialEq)]
pub struct KMeansResult {
    pub assignment: Vec<usize>,
    /// `d×k`, one centroid per column.
    pub centroids: DMatrix<f64>,
    /// Within-cluster sum of squares.
    pub wcss: f64,
}

fn sq_dist(y: &DMatrix<f64>, i: usize, centroids: &DMatrix<f64>, c: usize) -> f64 {
    y.column(i)
        .iter()
        .zip(centroids.column(c).iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum()
}

fn nearest(y: &DMatrix<f64>, i: usize, centroids: &DMatrix<f64>) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for c in 0..centroids.ncols() {
        let d = sq_dist(y, i, centroids, c);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn plus_plus_seeds(y: &DMatrix<f64>, k: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let n = y.ncols();
    let mut centroids = DMatrix::zeros(y.nrows(), k);
    let first = rng.random_range(0..n);
    centroids.set_column(0, &y.column(first));
    let mut closest: Vec<f64> = (0..n).map(|i| sq_dist(y, i, &centroids, 0)).collect();
    for c in 1..k {
        let total: f64 = closest.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &w) in closest.iter().enumerate() {
                if w > 0.0 && target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            // Rounding can run past the end; fall back to the last positive weight.
            if closest[chosen] == 0.0 {
                chosen = closest.iter().rposition(|&w| w > 0.0).unwrap_or(chosen);
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        centroids.set_column(c, &y.column(pick));
        for (i, slot) in closest.iter_mut().enumerate() {
            *slot = slot.min(sq_dist(y, i, &centroids, c));
        }
    }
    centroids
}

fn lloyd(y: &DMatrix<f64>, mut centroids: DMatrix<f64>) -> KMeansResult {
    let (dim, n) = y.shape();
    let k = centroids.ncols();
    let mut assignment = vec![usize::MAX; n];
    let mut previous_objective = f64::INFINITY;
    let mut wcss = 0.0;

    for _ in 0..MAX_LLOYD_ITERATIONS {
        let mut changed = false;
        let mut distances = vec![0.0; n];
        for i in 0..n {
            let (c, d) = nearest(y, i, &centroids);
            if assignment[i] != c {
                assignment[i] = c;
                changed = true;
            }
            distances[i] = d;
        }

        let mut counts = vec![0usize; k];
        for &c in &assignment {
            counts[c] += 1;
        }
        // Empty clusters take the point farthest from its centroid.
        for c in 0..k {
            if counts[c] == 0 {
                let far = (0..n)
                    .filter(|&i| counts[assignment[i]] > 1)
                    .max_by(|&a, &b| distances[a].total_cmp(&distances[b]).then(b.cmp(&a)));
                if let Some(i) = far {
                    counts[assignment[i]] -= 1;
                    assignment[i] = c;
                    counts[c] = 1;
                    distances[i] = 0.0;
                    changed = true;
                }
            }
        }

        let mut sums = DMatrix::zeros(dim, k);
        for (i, &c) in assignment.iter().enumerate() {
            let mut col = sums.column_mut(c);
            col += y.column(i);
        }
        for (c, &count) in counts.iter().enumerate() {
            if count > 0 {
                centroids.set_column(c, &(sums.column(c) / count as f64));
            }
        }
        wcss = (0..n).map(|i| sq_dist(y, i, &centroids, assignment[i])).sum();
        debug_assert!(
            wcss <= previous_objective + 1e-9 * (1.0 + previous_objective.abs()),
            "k-means objective increased from {previous_objective} to {wcss}"
        );
        previous_objective = wcss;
        if !changed {
            break;
        }
    }
    KMeansResult {
        assignment,
        centroids,
        wcss,
    }
}

/// Lloyd's algorithm with k-means++ seeding; the restart with the lowest
/// within-cluster sum of squares wins (earliest on ties).
pub fn kmeans_detailed(y: &DMatrix<f64>, k: usize, n_init: usize, seed: u64) -> Result<KMeansResult> {
    let n = y.ncols();
    if k == 0 || k > n {
        return Err(contract!("k-means needs 1 ≤ k ≤ N, got k = {k}, N = {n}"));
    }
    if n_init == 0 {
        return Err(contract!("k-means needs at least one restart"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<KMeansResult> = None;
    for _ in 0..n_init {
        let run = lloyd(y, plus_plus_seeds(y, k, &mut rng));
        if best.as_ref().is_none_or(|b| run.wcss < b.wcss) {
            best = Some(run);
        }
    }
    Ok(best.expect("n_init ≥ 1"))
}

pub fn kmeans(y: &DMatrix<f64>, k: usize, n_init: usize, seed: u64) -> Result<Vec<usize>> {
    Ok(kmeans_detailed(y, k, n_init, seed)?.assignment)
}
