use super::FeatureError;
use nalgebra::{DMatrix, SymmetricEigen};
use std::collections::VecDeque;

/// Eigenvalues below this fraction of the largest are treated as zero, so
/// round-off in an exactly low-rank matrix does not leak into coordinates.
const RELATIVE_EIGEN_FLOOR: f64 = 1e-10;
const SIGN_THRESHOLD: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct MdsEmbedding {
    /// One row per point, `dims` columns.
    pub coords: Vec<Vec<f64>>,
    /// Fewer than two points: coordinates are all zero.
    pub degenerate: bool,
}

/// Graph geodesic distances over the contact graph; pairs in different
/// components sit at the graph diameter plus one.
pub fn contact_distances(contact: &[Vec<u8>]) -> Vec<Vec<f64>> {
    let n = contact.len();
    let mut hops = vec![vec![usize::MAX; n]; n];
    for (source, row) in hops.iter_mut().enumerate() {
        row[source] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(i) = queue.pop_front() {
            for j in 0..n {
                if contact[i][j] == 1 && row[j] == usize::MAX {
                    row[j] = row[i] + 1;
                    queue.push_back(j);
                }
            }
        }
    }
    let diameter = hops
        .iter()
        .flatten()
        .filter(|&&h| h != usize::MAX)
        .max()
        .copied()
        .unwrap_or(0);
    hops.into_iter()
        .map(|row| {
            row.into_iter()
                .map(|h| if h == usize::MAX { diameter + 1 } else { h } as f64)
                .collect()
        })
        .collect()
}

/// 0 within a shared region, 1 otherwise.
pub fn region_distances(region: &[Vec<u8>]) -> Vec<Vec<f64>> {
    let n = region.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j || region[i][j] == 1 { 0.0 } else { 1.0 })
                .collect()
        })
        .collect()
}

/// Classical (Torgerson) MDS of a distance matrix.
pub fn mds_embed(distances: &[Vec<f64>], dims: usize) -> Result<MdsEmbedding, FeatureError> {
    let n = distances.len();
    let valid = distances.iter().enumerate().all(|(i, row)| {
        row.len() == n
            && row[i] == 0.0
            && row.iter().enumerate().all(|(j, &d)| d.is_finite() && d == distances[j][i])
    });
    if !valid {
        return Err(FeatureError::InvalidDistanceMatrix);
    }
    if n < 2 {
        return Ok(MdsEmbedding {
            coords: vec![vec![0.0; dims]; n],
            degenerate: true,
        });
    }

    let squared = DMatrix::from_fn(n, n, |i, j| distances[i][j] * distances[i][j]);
    let row_means: Vec<f64> = (0..n).map(|i| squared.row(i).mean()).collect();
    let grand_mean = squared.mean();
    let b = DMatrix::from_fn(n, n, |i, j| {
        -0.5 * (squared[(i, j)] - row_means[i] - row_means[j] + grand_mean)
    });
    // restore exact symmetry lost to summation order
    let b = (&b + b.transpose()) * 0.5;

    let eigen = SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &c| {
        eigen.eigenvalues[c]
            .total_cmp(&eigen.eigenvalues[a])
            .then(a.cmp(&c))
    });
    let largest = eigen.eigenvalues[order[0]].max(0.0);

    let mut coords = vec![vec![0.0; dims]; n];
    for (axis, &k) in order.iter().take(dims).enumerate() {
        let lambda = eigen.eigenvalues[k];
        if lambda <= largest * RELATIVE_EIGEN_FLOOR || lambda <= 0.0 {
            continue;
        }
        let scale = lambda.sqrt();
        let column: Vec<f64> = (0..n).map(|i| eigen.eigenvectors[(i, k)] * scale).collect();
        let flip = column
            .iter()
            .find(|v| v.abs() > SIGN_THRESHOLD)
            .is_some_and(|v| *v < 0.0);
        for (row, v) in coords.iter_mut().zip(column) {
            row[axis] = if flip { -v } else { v };
        }
    }
    Ok(MdsEmbedding {
        coords,
        degenerate: false,
    })
}
