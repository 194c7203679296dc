//! Classical (Torgerson) multidimensional scaling.

use nalgebra::DMatrix;

use crate::data::DissimilarityMatrix;
use crate::error::{Error, Result};

/// Embed the objects of a dissimilarity matrix into q-dimensional Euclidean
/// space by double-centering -D^2/2 and keeping the top q eigenpairs.
///
/// Columns are ordered by descending eigenvalue; a negative eigenvalue among
/// the top q contributes a zero coordinate column. Column signs are fixed so
/// the entry of largest magnitude is positive.
pub fn classical_mds(d: &DissimilarityMatrix, q: usize) -> Result<Vec<Vec<f64>>> {
    let n = d.n();
    if q == 0 || q > n.saturating_sub(1) {
        return Err(Error::config(format!("classical_mds: q = {} out of range 1..={}", q, n - 1)));
    }
    // B = -1/2 * J D^2 J with J = I - 11'/n.
    let mut b = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            b[(i, j)] = -0.5 * d.get(i, j).powi(2);
        }
    }
    let row_means: Vec<f64> = (0..n).map(|i| b.row(i).sum() / n as f64).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    for i in 0..n {
        for j in 0..n {
            b[(i, j)] += grand - row_means[i] - row_means[j];
        }
    }
    let eig = b.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &c| eig.eigenvalues[c].partial_cmp(&eig.eigenvalues[a]).unwrap());

    let mut coords = vec![vec![0.0; q]; n];
    for (col, &e) in order.iter().take(q).enumerate() {
        let lambda = eig.eigenvalues[e];
        if lambda <= 0.0 {
            continue;
        }
        let scale = lambda.sqrt();
        let v = eig.eigenvectors.column(e);
        let mut sign = 1.0;
        let mut max_abs = 0.0;
        for i in 0..n {
            if v[i].abs() > max_abs {
                max_abs = v[i].abs();
                sign = if v[i] >= 0.0 { 1.0 } else { -1.0 };
            }
        }
        for i in 0..n {
            coords[i][col] = sign * scale * v[i];
        }
    }
    Ok(coords)
}

pub fn euclidean_matrix(points: &[Vec<f64>]) -> Result<DissimilarityMatrix> {
    DissimilarityMatrix::from_fn(points.len(), |i, j| {
        points[i]
            .iter()
            .zip(&points[j])
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn recovers_planted_distances() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let n = 25;
        let q = 3;
        let pts: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..q).map(|_| rng.gen_range(-2.0..2.0)).collect())
            .collect();
        let d = euclidean_matrix(&pts).unwrap();
        let coords = classical_mds(&d, q).unwrap();
        let d2 = euclidean_matrix(&coords).unwrap();
        for i in 0..n {
            for j in 0..n {
                assert!((d.get(i, j) - d2.get(i, j)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn two_points_one_dimension() {
        let d = DissimilarityMatrix::from_fn(2, |_, _| 2.0).unwrap();
        let coords = classical_mds(&d, 1).unwrap();
        assert!((coords[0][0].abs() - 1.0).abs() < 1e-12);
        assert!((coords[1][0].abs() - 1.0).abs() < 1e-12);
        assert!((coords[0][0] + coords[1][0]).abs() < 1e-12);
    }

    #[test]
    fn q_out_of_range() {
        let d = DissimilarityMatrix::from_fn(3, |i, j| (i as f64 - j as f64).abs()).unwrap();
        assert!(classical_mds(&d, 0).is_err());
        assert!(classical_mds(&d, 3).is_err());
    }

    #[test]
    fn columns_ordered_by_spread() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let pts: Vec<Vec<f64>> = (0..30)
            .map(|_| vec![rng.gen_range(-5.0..5.0), rng.gen_range(-0.5..0.5)])
            .collect();
        let d = euclidean_matrix(&pts).unwrap();
        let coords = classical_mds(&d, 2).unwrap();
        let var = |col: usize| {
            let m: f64 = coords.iter().map(|r| r[col]).sum::<f64>() / 30.0;
            coords.iter().map(|r| (r[col] - m).powi(2)).sum::<f64>()
        };
        assert!(var(0) >= var(1));
    }
}
