//! Cluster validation indexes used as bootstrap test statistics: Average
//! Silhouette Width, Prediction Strength, and BIC with its (k=1)-adjustment.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clustering::{cut_tree, linkage_cluster, pam, GmmFit, Linkage};
use crate::data::{DissimilarityMatrix, Partition};
use crate::error::{Error, Result};

/// Average Silhouette Width over non-noise objects, in [-1, 1].
///
/// Objects in singleton clusters contribute s(i) = 0.
pub fn asw(d: &DissimilarityMatrix, part: &Partition) -> Result<f64> {
    if part.k() < 2 {
        return Err(Error::config("asw: k >= 2 required"));
    }
    if part.n() != d.n() {
        return Err(Error::config("asw: partition size does not match matrix"));
    }
    let clusters = part.clusters();
    let mut total = 0.0;
    let mut count = 0usize;
    for i in 0..d.n() {
        let Some(c) = part.label(i) else { continue };
        count += 1;
        if clusters[c].len() < 2 {
            continue; // s(i) = 0
        }
        let a: f64 = clusters[c]
            .iter()
            .filter(|&&j| j != i)
            .map(|&j| d.get(i, j))
            .sum::<f64>()
            / (clusters[c].len() - 1) as f64;
        let b = clusters
            .iter()
            .enumerate()
            .filter(|(cc, members)| *cc != c && !members.is_empty())
            .map(|(_, members)| {
                members.iter().map(|&j| d.get(i, j)).sum::<f64>() / members.len() as f64
            })
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        if denom > 0.0 {
            total += (b - a) / denom;
        }
    }
    if count == 0 {
        return Err(Error::config("asw: no non-noise objects"));
    }
    Ok(total / count as f64)
}

/// Distance-based clustering methods usable inside the Prediction Strength.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PsMethod {
    Pam,
    AverageLinkage,
    CompleteLinkage,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PredictionStrengthConfig {
    /// Number of random half-splits.
    pub b: usize,
    pub method: PsMethod,
    pub seed: u64,
}

fn cluster_subset(d: &DissimilarityMatrix, idx: &[usize], k: usize, method: PsMethod) -> Result<Partition> {
    let sub = d.restrict(idx);
    match method {
        PsMethod::Pam => Ok(pam(&sub, k)?.partition),
        PsMethod::AverageLinkage => cut_tree(&linkage_cluster(&sub, Linkage::Average)?, k),
        PsMethod::CompleteLinkage => cut_tree(&linkage_cluster(&sub, Linkage::Complete)?, k),
    }
}

/// Predict each object in `test` into one of the clusters of `train_part`
/// (a partition of the objects listed in `train`), using the method-specific
/// rule: closest medoid for PAM, minimum average distance for average
/// linkage, minimax distance for complete linkage.
fn predict(
    d: &DissimilarityMatrix,
    train: &[usize],
    train_part: &Partition,
    test: &[usize],
    method: PsMethod,
) -> Vec<usize> {
    let clusters = train_part.clusters();
    test.iter()
        .map(|&i| {
            let mut best = (0usize, f64::INFINITY);
            for (c, members) in clusters.iter().enumerate() {
                let score = match method {
                    PsMethod::Pam => {
                        let m = train[train_part.medoids().unwrap()[c]];
                        d.get(i, m)
                    }
                    PsMethod::AverageLinkage => {
                        members.iter().map(|&j| d.get(i, train[j])).sum::<f64>()
                            / members.len() as f64
                    }
                    PsMethod::CompleteLinkage => members
                        .iter()
                        .map(|&j| d.get(i, train[j]))
                        .fold(f64::NEG_INFINITY, f64::max),
                };
                if score < best.1 {
                    best = (c, score);
                }
            }
            best.0
        })
        .collect()
}

/// Prediction Strength over `cfg.b` random half-splits, in [0, 1].
///
/// For each (half, clustering) pair the minimum over clusters of the
/// proportion of within-cluster pairs whose co-membership the other half's
/// clustering predicts correctly; clusters with no pairs count as 1.
pub fn prediction_strength(
    d: &DissimilarityMatrix,
    k: usize,
    cfg: &PredictionStrengthConfig,
) -> Result<f64> {
    let n = d.n();
    if k < 2 {
        return Err(Error::config("prediction_strength: k >= 2 required"));
    }
    if n < 4 {
        return Err(Error::config("prediction_strength: n >= 4 required"));
    }
    if cfg.b < 1 {
        return Err(Error::config("prediction_strength: b >= 1 required"));
    }
    let mut total = 0.0;
    for split in 0..cfg.b {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(split as u64));
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut rng);
        let half_a: Vec<usize> = idx[..n / 2].to_vec();
        let half_b: Vec<usize> = idx[n / 2..].to_vec();
        for (train, test) in [(&half_a, &half_b), (&half_b, &half_a)] {
            let train_part = cluster_subset(d, train, k, cfg.method)?;
            let test_part = cluster_subset(d, test, k, cfg.method)?;
            let predicted = predict(d, train, &train_part, test, cfg.method);
            let mut worst = f64::INFINITY;
            for members in test_part.clusters() {
                let mut pairs = 0usize;
                let mut correct = 0usize;
                for a in 0..members.len() {
                    for b in (a + 1)..members.len() {
                        pairs += 1;
                        if predicted[members[a]] == predicted[members[b]] {
                            correct += 1;
                        }
                    }
                }
                let prop = if pairs == 0 { 1.0 } else { correct as f64 / pairs as f64 };
                worst = worst.min(prop);
            }
            total += worst;
        }
    }
    Ok(total / (2 * cfg.b) as f64)
}

/// BIC in the "larger is better" orientation: `2 loglik - r(k) log(n)`.
pub fn bic(fit: &GmmFit, n: usize) -> f64 {
    2.0 * fit.loglik - fit.n_params as f64 * (n as f64).ln()
}

/// How the (k=1)-adjusted BIC profile is normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BicAdjustment {
    /// `(BIC(k) - BIC(1)) / |BIC(1)|`: larger always means stronger
    /// clustering, regardless of the sign of BIC(1).
    #[default]
    AbsoluteDenominator,
    /// `(BIC(k) - BIC(1)) / BIC(1)`: flips sign when BIC(1) < 0.
    SignedDenominator,
}

/// The (k=1)-adjusted BIC profile V(k); requires a k=1 entry.
pub fn adjusted_bic_profile(
    bics: &BTreeMap<usize, f64>,
    adjustment: BicAdjustment,
) -> Result<BTreeMap<usize, f64>> {
    let b1 = *bics
        .get(&1)
        .ok_or_else(|| Error::config("adjusted BIC requires a k = 1 entry"))?;
    if b1 == 0.0 {
        return Err(Error::numeric("adjusted BIC undefined: BIC(1) = 0"));
    }
    let denom = match adjustment {
        BicAdjustment::AbsoluteDenominator => b1.abs(),
        BicAdjustment::SignedDenominator => b1,
    };
    Ok(bics.iter().map(|(&k, &b)| (k, (b - b1) / denom)).collect())
}
