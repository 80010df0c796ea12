use alloc::vec;
use alloc::vec::Vec;

use crate::error::{contract, Result};

/// Maps arbitrary label values onto `0..k` (order of first appearance).
fn densify(values: &[usize]) -> (Vec<usize>, usize) {
    let mut seen: Vec<usize> = Vec::new();
    let dense = values
        .iter()
        .map(|v| match seen.iter().position(|s| s == v) {
            Some(i) => i,
            None => {
                seen.push(*v);
                seen.len() - 1
            }
        })
        .collect();
    (dense, seen.len())
}

fn contingency(assignment: &[usize], truth: &[usize]) -> Result<(Vec<Vec<usize>>, usize, usize)> {
    if assignment.len() != truth.len() {
        return Err(contract!(
            "assignment has {} entries but truth has {}",
            assignment.len(),
            truth.len()
        ));
    }
    let (a, ka) = densify(assignment);
    let (t, kt) = densify(truth);
    let mut table = vec![vec![0usize; kt]; ka];
    for (&i, &j) in a.iter().zip(&t) {
        table[i][j] += 1;
    }
    Ok((table, ka, kt))
}

/// Maximum-weight perfect matching on a square matrix (Hungarian method with
/// potentials). Returns `row → column`.
pub fn hungarian_max(weights: &[Vec<f64>]) -> Vec<usize> {
    let n = weights.len();
    if n == 0 {
        return Vec::new();
    }
    let max = weights
        .iter()
        .flat_map(|r| r.iter().copied())
        .fold(f64::NEG_INFINITY, f64::max);
    // Minimize max - w, 1-based indexing with a sentinel column 0.
    let cost = |i: usize, j: usize| max - weights[i - 1][j - 1];
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost(i0, j) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut row_to_col = vec![0usize; n];
    for j in 1..=n {
        if p[j] > 0 {
            row_to_col[p[j] - 1] = j - 1;
        }
    }
    row_to_col
}

/// Fraction of samples labeled correctly under the best one-to-one
/// cluster → class matching.
pub fn clustering_accuracy(assignment: &[usize], truth: &[usize]) -> Result<f64> {
    let (table, ka, kt) = contingency(assignment, truth)?;
    let n = assignment.len();
    if n == 0 {
        return Ok(0.0);
    }
    let size = ka.max(kt);
    let weights: Vec<Vec<f64>> = (0..size)
        .map(|i| {
            (0..size)
                .map(|j| {
                    if i < ka && j < kt {
                        table[i][j] as f64
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    let matching = hungarian_max(&weights);
    let matched: f64 = matching
        .iter()
        .enumerate()
        .map(|(i, &j)| weights[i][j])
        .sum();
    Ok(matched / n as f64)
}

fn entropy(counts: impl Iterator<Item = usize>, n: f64) -> f64 {
    counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * libm::log(p)
        })
        .sum()
}

/// `I(A;T) / sqrt(H(A) H(T))` with natural logarithms.
///
/// When either partition is constant the ratio is undefined; it is 1 if both
/// are constant and 0 otherwise.
pub fn nmi(assignment: &[usize], truth: &[usize]) -> Result<f64> {
    let (table, ka, kt) = contingency(assignment, truth)?;
    let n = assignment.len();
    if n == 0 {
        return Ok(0.0);
    }
    let nf = n as f64;
    let rows: Vec<usize> = table.iter().map(|r| r.iter().sum()).collect();
    let cols: Vec<usize> = (0..kt).map(|j| table.iter().map(|r| r[j]).sum()).collect();
    let ha = entropy(rows.iter().copied(), nf);
    let ht = entropy(cols.iter().copied(), nf);
    if ka == 1 || kt == 1 || ha == 0.0 || ht == 0.0 {
        return Ok(if ka == 1 && kt == 1 { 1.0 } else { 0.0 });
    }
    let mut mi = 0.0;
    for i in 0..ka {
        for j in 0..kt {
            let nij = table[i][j];
            if nij > 0 {
                let nij = nij as f64;
                mi += nij / nf * libm::log(nf * nij / (rows[i] as f64 * cols[j] as f64));
            }
        }
    }
    Ok((mi / libm::sqrt(ha * ht)).clamp(0.0, 1.0))
}
