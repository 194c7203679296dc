//! Partitioning Around Medoids: BUILD initialization followed by SWAP
//! iterations to a single-swap local optimum.
//!
//! All ties (equal distances, equal swap gains) are broken toward the lowest
//! index so results are deterministic.

use crate::data::{DissimilarityMatrix, Partition};
use crate::error::{Error, Result};

/// Result of a PAM run: the partition plus the objective
/// `sum_i d(i, medoid(i))`.
#[derive(Debug, Clone)]
pub struct PamResult {
    pub partition: Partition,
    pub objective: f64,
}

pub fn pam(d: &DissimilarityMatrix, k: usize) -> Result<PamResult> {
    let n = d.n();
    if k < 2 || k > n {
        return Err(Error::config(format!("pam: k = {} out of range 2..={}", k, n)));
    }
    let mut medoids = build(d, k);
    let mut objective = total_cost(d, &medoids);

    // SWAP: apply the best strictly improving medoid/non-medoid exchange
    // until none exists.
    loop {
        let mut best: Option<(usize, usize, f64)> = None;
        for mi in 0..k {
            for cand in 0..n {
                if medoids.contains(&cand) {
                    continue;
                }
                let saved = medoids[mi];
                medoids[mi] = cand;
                let cost = total_cost(d, &medoids);
                medoids[mi] = saved;
                let gain = objective - cost;
                if gain > 1e-12 && best.map_or(true, |(_, _, g)| gain > g) {
                    best = Some((mi, cand, gain));
                }
            }
        }
        match best {
            Some((mi, cand, gain)) => {
                medoids[mi] = cand;
                objective -= gain;
            }
            None => break,
        }
    }

    medoids.sort_unstable();
    objective = total_cost(d, &medoids);
    let labels: Vec<Option<usize>> = (0..n).map(|i| Some(nearest(d, &medoids, i))) .collect();
    let partition = Partition::new(labels, k, Some(medoids))?;
    Ok(PamResult { partition, objective })
}

/// Greedy BUILD phase: each medoid maximizes the decrease in total cost.
fn build(d: &DissimilarityMatrix, k: usize) -> Vec<usize> {
    let n = d.n();
    let first = (0..n)
        .min_by(|&a, &b| {
            let ca: f64 = (0..n).map(|i| d.get(i, a)).sum();
            let cb: f64 = (0..n).map(|i| d.get(i, b)).sum();
            ca.partial_cmp(&cb).unwrap()
        })
        .unwrap();
    let mut medoids = vec![first];
    let mut nearest_dist: Vec<f64> = (0..n).map(|i| d.get(i, first)).collect();
    while medoids.len() < k {
        let mut best = (usize::MAX, f64::NEG_INFINITY);
        for cand in 0..n {
            if medoids.contains(&cand) {
                continue;
            }
            let gain: f64 = (0..n)
                .map(|i| (nearest_dist[i] - d.get(i, cand)).max(0.0))
                .sum();
            if gain > best.1 {
                best = (cand, gain);
            }
        }
        medoids.push(best.0);
        for i in 0..n {
            nearest_dist[i] = nearest_dist[i].min(d.get(i, best.0));
        }
    }
    medoids
}

fn nearest(d: &DissimilarityMatrix, medoids: &[usize], i: usize) -> usize {
    let mut best = 0;
    for (c, &m) in medoids.iter().enumerate() {
        if d.get(i, m) < d.get(i, medoids[best]) {
            best = c;
        }
    }
    best
}

pub(crate) fn total_cost(d: &DissimilarityMatrix, medoids: &[usize]) -> f64 {
    (0..d.n())
        .map(|i| {
            medoids
                .iter()
                .map(|&m| d.get(i, m))
                .fold(f64::INFINITY, f64::min)
        })
        .sum()
}
