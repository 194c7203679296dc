//! Latent Gaussian null model for mixed-type data: a correlation matrix
//! estimated from pairwise polychoric correlations drives latent normals
//! that are transformed to match the observed marginals. Nominal categories
//! receive an estimated ordering; continuous marginals combine a point mass
//! at the floor value with a unimodal kernel density above it.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{MixedDataset, Value, VarKind};
use crate::error::{Error, Result};
use crate::nullmodel::density::UnimodalDensity;
use crate::nullmodel::polychoric::{
    contingency_table, norm_cdf, polychoric_correlation, thresholds_from_marginals,
};

/// Marginal model of a continuous variable: point mass at the floor value,
/// unimodal density above it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContinuousMarginal {
    pub floor_value: f64,
    pub floor_prob: f64,
    pub density: UnimodalDensity,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum MarginalModel {
    Continuous(ContinuousMarginal),
    Categorical {
        /// Interior Gaussian thresholds between ordered categories.
        thresholds: Vec<f64>,
        /// `level_order[g]` is the original level index at ordered position g.
        level_order: Vec<usize>,
    },
}

/// Fitted latent Gaussian null model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LatentGaussianParams {
    pub specs: Vec<crate::data::VariableSpec>,
    /// p x p correlation matrix, row-major, positive semi-definite with unit
    /// diagonal.
    pub sigma: Vec<f64>,
    pub marginals: Vec<MarginalModel>,
    /// Largest absolute entry change caused by the PSD projection of the
    /// pairwise-assembled correlation matrix.
    pub projection_max_shift: f64,
}

impl LatentGaussianParams {
    pub fn p(&self) -> usize {
        self.specs.len()
    }

    pub fn sigma_at(&self, i: usize, j: usize) -> f64 {
        self.sigma[i * self.p() + j]
    }
}

/// Estimated ordering of a nominal variable's levels: for each level, the
/// dummy indicator's sample correlations with all originally ordinal or
/// continuous variables are averaged, and levels are sorted ascending by
/// that average (stable; levels absent from the data go last).
pub fn nominal_ordering(data: &MixedDataset, j: usize) -> Result<Vec<usize>> {
    let spec = &data.specs()[j];
    if spec.kind != VarKind::Nominal {
        return Err(Error::config(format!("variable '{}' is not nominal", spec.name)));
    }
    let reference_cols: Vec<Vec<f64>> = data
        .specs()
        .iter()
        .enumerate()
        .filter(|(_, s)| s.kind != VarKind::Nominal)
        .map(|(v, _)| data.column_reals(v))
        .collect();
    if reference_cols.is_empty() {
        return Err(Error::config(
            "nominal ordering needs at least one ordinal or continuous variable",
        ));
    }
    let n = data.n();
    let col = data.column_reals(j);
    let mut keyed: Vec<(usize, bool, f64)> = Vec::with_capacity(spec.levels.len());
    for level in 0..spec.levels.len() {
        let dummy: Vec<f64> = col.iter().map(|&v| f64::from(v as usize == level)).collect();
        let dummy_mean = dummy.iter().sum::<f64>() / n as f64;
        let dummy_var = dummy.iter().map(|x| (x - dummy_mean).powi(2)).sum::<f64>();
        if dummy_var == 0.0 {
            keyed.push((level, true, 0.0)); // absent level, placed last
            continue;
        }
        let avg: f64 = reference_cols
            .iter()
            .map(|rc| {
                let rm = rc.iter().sum::<f64>() / n as f64;
                let rv = rc.iter().map(|x| (x - rm).powi(2)).sum::<f64>();
                if rv == 0.0 {
                    return 0.0;
                }
                let cov: f64 = dummy
                    .iter()
                    .zip(rc)
                    .map(|(d, r)| (d - dummy_mean) * (r - rm))
                    .sum();
                cov / (dummy_var * rv).sqrt()
            })
            .sum::<f64>()
            / reference_cols.len() as f64;
        keyed.push((level, false, avg));
    }
    keyed.sort_by(|a, b| {
        a.1.cmp(&b.1)
            .then(a.2.partial_cmp(&b.2).unwrap())
            .then(std::cmp::Ordering::Equal)
    });
    Ok(keyed.into_iter().map(|(level, _, _)| level).collect())
}

/// Ordinalized encoding of every column for correlation estimation:
/// continuous values binned into `cont_bins` approximately-equal-count
/// categories, categorical values mapped to their (estimated) order position.
fn ordinalize(
    data: &MixedDataset,
    cont_bins: usize,
    orderings: &[Option<Vec<usize>>],
) -> Vec<(Vec<usize>, usize)> {
    let n = data.n();
    data.specs()
        .iter()
        .enumerate()
        .map(|(j, spec)| match spec.kind {
            VarKind::Continuous => {
                let col = data.column_reals(j);
                let mut idx: Vec<usize> = (0..n).collect();
                idx.sort_by(|&a, &b| col[a].partial_cmp(&col[b]).unwrap().then(a.cmp(&b)));
                let mut codes = vec![0usize; n];
                for (rank, &i) in idx.iter().enumerate() {
                    codes[i] = (rank * cont_bins / n).min(cont_bins - 1);
                }
                // Ties must share a bin: push equal values into the lowest
                // bin any of them received.
                let mut by_value: std::collections::BTreeMap<u64, usize> = Default::default();
                for &i in &idx {
                    let key = col[i].to_bits();
                    let e = by_value.entry(key).or_insert(codes[i]);
                    *e = (*e).min(codes[i]);
                }
                for i in 0..n {
                    codes[i] = by_value[&col[i].to_bits()];
                }
                (codes, cont_bins)
            }
            VarKind::Nominal => {
                let order = orderings[j].as_ref().expect("nominal ordering present");
                let mut position = vec![0usize; spec.levels.len()];
                for (pos, &level) in order.iter().enumerate() {
                    position[level] = pos;
                }
                let codes = data
                    .rows()
                    .iter()
                    .map(|r| position[r[j].level()])
                    .collect();
                (codes, spec.levels.len())
            }
            _ => {
                let codes = data.rows().iter().map(|r| r[j].level()).collect();
                (codes, spec.levels.len())
            }
        })
        .collect()
}

/// Project a symmetric matrix to the nearest positive semi-definite
/// correlation matrix by clipping negative eigenvalues and renormalizing the
/// diagonal to one. Returns the matrix and the largest entry shift.
fn project_to_correlation(mut m: DMatrix<f64>) -> (DMatrix<f64>, f64) {
    let p = m.nrows();
    let orig = m.clone();
    let eig = m.clone().symmetric_eigen();
    if eig.eigenvalues.iter().any(|&l| l < 0.0) {
        let clipped: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(clipped));
        m = &eig.eigenvectors * d * eig.eigenvectors.transpose();
        for i in 0..p {
            let di = m[(i, i)].max(1e-12).sqrt();
            for j in 0..p {
                m[(i, j)] /= di;
                m[(j, i)] /= di;
            }
            m[(i, i)] = 1.0;
        }
        // Re-symmetrize.
        for i in 0..p {
            for j in 0..i {
                let v = 0.5 * (m[(i, j)] + m[(j, i)]);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
    }
    let shift = (0..p)
        .flat_map(|i| (0..p).map(move |j| (i, j)))
        .map(|(i, j)| (m[(i, j)] - orig[(i, j)]).abs())
        .fold(0.0, f64::max);
    (m, shift)
}

/// Fit the latent Gaussian null model to a mixed-type dataset.
pub fn estimate_latent_gaussian(data: &MixedDataset, cont_bins: usize) -> Result<LatentGaussianParams> {
    if cont_bins < 2 {
        return Err(Error::config("cont_bins >= 2 required"));
    }
    let p = data.p();
    let n = data.n();

    let orderings: Vec<Option<Vec<usize>>> = data
        .specs()
        .iter()
        .enumerate()
        .map(|(j, s)| {
            if s.kind == VarKind::Nominal {
                nominal_ordering(data, j).map(Some)
            } else {
                Ok(None)
            }
        })
        .collect::<Result<_>>()?;

    let ordinal_cols = ordinalize(data, cont_bins, &orderings);

    // Per-variable thresholds from the ordinalized marginals.
    let thresholds: Vec<Vec<f64>> = ordinal_cols
        .iter()
        .map(|(codes, h)| {
            let mut counts = vec![0.0; *h];
            for &c in codes {
                counts[c] += 1.0;
            }
            thresholds_from_marginals(&counts)
        })
        .collect::<Result<_>>()?;

    // Pairwise polychoric correlations.
    let mut sigma = DMatrix::identity(p, p);
    for a in 0..p {
        for b in (a + 1)..p {
            let (ca, ha) = &ordinal_cols[a];
            let (cb, hb) = &ordinal_cols[b];
            let table = contingency_table(ca, cb, *ha, *hb);
            let rho = polychoric_correlation(&table, &thresholds[a], &thresholds[b])?;
            sigma[(a, b)] = rho;
            sigma[(b, a)] = rho;
        }
    }
    let (sigma, projection_max_shift) = project_to_correlation(sigma);

    let marginals: Vec<MarginalModel> = data
        .specs()
        .iter()
        .enumerate()
        .map(|(j, spec)| match spec.kind {
            VarKind::Continuous => {
                let col = data.column_reals(j);
                let floor_value = col.iter().cloned().fold(f64::INFINITY, f64::min);
                let above: Vec<f64> = col.iter().cloned().filter(|&x| x > floor_value).collect();
                let floor_prob = (n - above.len()) as f64 / n as f64;
                let density = UnimodalDensity::fit(&above)?;
                Ok(MarginalModel::Continuous(ContinuousMarginal {
                    floor_value,
                    floor_prob,
                    density,
                }))
            }
            _ => {
                let (codes, h) = &ordinal_cols[j];
                let mut counts = vec![0.0; *h];
                for &c in codes {
                    counts[c] += 1.0;
                }
                let level_order = match &orderings[j] {
                    Some(order) => order.clone(),
                    None => (0..spec.levels.len()).collect(),
                };
                Ok(MarginalModel::Categorical {
                    thresholds: thresholds_from_marginals(&counts)?,
                    level_order,
                })
            }
        })
        .collect::<Result<_>>()?;

    Ok(LatentGaussianParams {
        specs: data.specs().to_vec(),
        sigma: sigma.iter().cloned().collect(),
        marginals,
        projection_max_shift,
    })
}

/// Draw n observations from the fitted null model.
pub fn sample_latent_gaussian(
    params: &LatentGaussianParams,
    n: usize,
    seed: u64,
) -> Result<MixedDataset> {
    let p = params.p();
    let sigma = DMatrix::from_row_slice(p, p, &params.sigma);
    let eig = sigma.symmetric_eigen();
    let sqrt_vals: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).collect();
    let factor = &eig.eigenvectors * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(sqrt_vals));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let raw: Vec<f64> = (0..p).map(|_| StandardNormal.sample(&mut rng)).collect();
        let z = &factor * nalgebra::DVector::from_vec(raw);
        let mut row = Vec::with_capacity(p);
        for (j, marginal) in params.marginals.iter().enumerate() {
            let value = match marginal {
                MarginalModel::Continuous(m) => {
                    let u = norm_cdf(z[j]);
                    if u <= m.floor_prob {
                        Value::Real(m.floor_value)
                    } else {
                        let v = (u - m.floor_prob) / (1.0 - m.floor_prob);
                        Value::Real(m.density.quantile(v))
                    }
                }
                MarginalModel::Categorical { thresholds, level_order } => {
                    let pos = thresholds.iter().take_while(|&&t| z[j] > t).count();
                    Value::Level(level_order[pos])
                }
            };
            row.push(value);
        }
        rows.push(row);
    }
    MixedDataset::new(params.specs.clone(), rows)
}
