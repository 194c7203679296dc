//! Spatial autocorrelation null model for presence-absence data: species
//! ranges grow island by island, drawing from neighbors of the current range
//! or (with the disjunction probability) from non-neighbors, weighted by
//! island attractivity. The disjunction parameter is calibrated by inverse
//! regression of the observed disjunction rate on simulated ones.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::PresenceAbsenceData;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpatialRangeParams {
    /// Disjunction probability in [0, 1].
    pub p_d: f64,
    /// Empirical bag of species range sizes.
    pub species_sizes: Vec<usize>,
    /// Island attractivity distribution over regions (sums to 1).
    pub island_attractivity: Vec<f64>,
    /// Symmetric region adjacency.
    pub neighbors: Vec<BTreeSet<usize>>,
    pub region_names: Vec<String>,
}

/// Diagnostics of the disjunction-parameter regression.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DisjunctionReport {
    pub observed_qd: f64,
    pub grid: Vec<f64>,
    pub mean_simulated_qd: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub p_d_estimate: f64,
}

/// Number of connected components of a region set in the adjacency graph.
pub fn connectivity_components(range: &[usize], neighbors: &[BTreeSet<usize>]) -> usize {
    let in_range: BTreeSet<usize> = range.iter().cloned().collect();
    let mut seen = BTreeSet::new();
    let mut components = 0;
    for &start in range {
        if seen.contains(&start) {
            continue;
        }
        components += 1;
        let mut stack = vec![start];
        seen.insert(start);
        while let Some(r) = stack.pop() {
            for &nb in &neighbors[r] {
                if in_range.contains(&nb) && seen.insert(nb) {
                    stack.push(nb);
                }
            }
        }
    }
    components
}

/// Naive disjunction rate `q_d = sum(a_i - 1) / sum(n_i - 1)`.
pub fn observed_qd(data: &PresenceAbsenceData) -> Result<f64> {
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..data.n_species() {
        let range = data.range_of(i);
        num += (connectivity_components(&range, data.neighbors()) - 1) as f64;
        den += (range.len() - 1) as f64;
    }
    if den == 0.0 {
        return Err(Error::data("q_d undefined: every species occupies a single region"));
    }
    Ok(num / den)
}

fn qd_of_ranges(ranges: &[Vec<usize>], neighbors: &[BTreeSet<usize>]) -> Option<f64> {
    let mut num = 0.0;
    let mut den = 0.0;
    for range in ranges {
        num += (connectivity_components(range, neighbors) - 1) as f64;
        den += (range.len() - 1) as f64;
    }
    (den > 0.0).then(|| num / den)
}

fn draw_weighted(set: &BTreeSet<usize>, weights: &[f64], rng: &mut impl Rng) -> usize {
    let total: f64 = set.iter().map(|&r| weights[r]).sum();
    if total <= 0.0 {
        // All candidate islands have zero attractivity; fall back to uniform.
        let idx = rng.gen_range(0..set.len());
        return *set.iter().nth(idx).unwrap();
    }
    let u: f64 = rng.gen_range(0.0..total);
    let mut cum = 0.0;
    for &r in set {
        cum += weights[r];
        if u < cum {
            return r;
        }
    }
    *set.iter().next_back().unwrap()
}

fn sample_range(params: &SpatialRangeParams, size: usize, rng: &mut impl Rng) -> Vec<usize> {
    let n_regions = params.region_names.len();
    let all: BTreeSet<usize> = (0..n_regions).collect();
    let mut chosen = BTreeSet::new();
    let first = draw_weighted(&all, &params.island_attractivity, rng);
    chosen.insert(first);
    while chosen.len() < size {
        let mut n1: BTreeSet<usize> = BTreeSet::new();
        for &c in &chosen {
            for &nb in &params.neighbors[c] {
                if !chosen.contains(&nb) {
                    n1.insert(nb);
                }
            }
        }
        let n0: BTreeSet<usize> = all
            .iter()
            .filter(|r| !chosen.contains(r) && !n1.contains(r))
            .cloned()
            .collect();
        let pick_from = if n0.is_empty() {
            &n1
        } else if n1.is_empty() {
            &n0
        } else if rng.gen_bool(params.p_d) {
            &n0
        } else {
            &n1
        };
        chosen.insert(draw_weighted(pick_from, &params.island_attractivity, rng));
    }
    chosen.into_iter().collect()
}

/// Draw a full synthetic presence-absence dataset of `n_species` species.
pub fn sample_spatial(
    params: &SpatialRangeParams,
    n_species: usize,
    seed: u64,
) -> Result<PresenceAbsenceData> {
    if params.species_sizes.is_empty() {
        return Err(Error::data("spatial params: empty species size distribution"));
    }
    let n_regions = params.region_names.len();
    if params.species_sizes.iter().any(|&s| s == 0 || s > n_regions) {
        return Err(Error::data("spatial params: species size out of range"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut matrix = Vec::with_capacity(n_species);
    let mut names = Vec::with_capacity(n_species);
    for i in 0..n_species {
        let size = params.species_sizes[rng.gen_range(0..params.species_sizes.len())];
        let range = sample_range(params, size, &mut rng);
        let mut row = vec![false; n_regions];
        for r in range {
            row[r] = true;
        }
        matrix.push(row);
        names.push(format!("sim{}", i + 1));
    }
    let pairs: Vec<(usize, usize)> = params
        .neighbors
        .iter()
        .enumerate()
        .flat_map(|(a, nb)| nb.iter().filter(move |&&b| a < b).map(move |&b| (a, b)))
        .collect();
    PresenceAbsenceData::new(matrix, &pairs, names, params.region_names.clone())
}

/// Mean simulated q_d at a given trial disjunction probability.
fn simulate_mean_qd(
    base: &SpatialRangeParams,
    p_d: f64,
    n_species: usize,
    reps: usize,
    rng: &mut ChaCha8Rng,
) -> Result<f64> {
    let mut trial = base.clone();
    trial.p_d = p_d;
    let mut values = Vec::with_capacity(reps);
    for _ in 0..reps {
        let ranges: Vec<Vec<usize>> = (0..n_species)
            .map(|_| {
                let size = trial.species_sizes[rng.gen_range(0..trial.species_sizes.len())];
                sample_range(&trial, size, rng)
            })
            .collect();
        if let Some(q) = qd_of_ranges(&ranges, &trial.neighbors) {
            values.push(q);
        }
    }
    if values.is_empty() {
        return Err(Error::numeric("disjunction calibration: q_d undefined in every replicate"));
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

/// Estimate all spatial null-model parameters from data. The disjunction
/// probability is found by simulating q_d over a grid of trial values,
/// regressing mean q_d on p_d, and inverting at the observed q_d (clipped to
/// [0, 1]).
pub fn estimate_spatial(
    data: &PresenceAbsenceData,
    grid: &[f64],
    reps_per_value: usize,
    seed: u64,
) -> Result<(SpatialRangeParams, DisjunctionReport)> {
    if grid.len() < 2 {
        return Err(Error::config("disjunction grid needs at least 2 values"));
    }
    let species_sizes: Vec<usize> = (0..data.n_species()).map(|i| data.range_of(i).len()).collect();
    let mut attractivity: Vec<f64> = (0..data.n_regions())
        .map(|r| (0..data.n_species()).filter(|&i| data.present(i, r)).count() as f64)
        .collect();
    let total: f64 = attractivity.iter().sum();
    for a in attractivity.iter_mut() {
        *a /= total;
    }
    let base = SpatialRangeParams {
        p_d: 0.0,
        species_sizes,
        island_attractivity: attractivity,
        neighbors: data.neighbors().to_vec(),
        region_names: data.region_names().to_vec(),
    };

    let q_obs = observed_qd(data)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut means = Vec::with_capacity(grid.len());
    for &p in grid {
        means.push(simulate_mean_qd(&base, p, data.n_species(), reps_per_value, &mut rng)?);
    }

    // Simple linear regression of mean q_d on p_d.
    let gm: f64 = grid.iter().sum::<f64>() / grid.len() as f64;
    let qm: f64 = means.iter().sum::<f64>() / means.len() as f64;
    let sxx: f64 = grid.iter().map(|&x| (x - gm).powi(2)).sum();
    let sxy: f64 = grid.iter().zip(&means).map(|(&x, &y)| (x - gm) * (y - qm)).sum();
    let slope = sxy / sxx;
    let intercept = qm - slope * gm;
    if slope <= 1e-9 {
        return Err(Error::numeric(
            "disjunction calibration: simulated q_d does not increase in p_d",
        ));
    }
    let p_d = ((q_obs - intercept) / slope).clamp(0.0, 1.0);

    let mut params = base;
    params.p_d = p_d;
    let report = DisjunctionReport {
        observed_qd: q_obs,
        grid: grid.to_vec(),
        mean_simulated_qd: means,
        slope,
        intercept,
        p_d_estimate: p_d,
    };
    Ok((params, report))
}

/// Default calibration grid {0, 0.1, ..., 0.9}.
pub fn default_grid() -> Vec<f64> {
    (0..10).map(|i| i as f64 / 10.0).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Ring of n regions, each adjacent to its two neighbors.
    fn ring(n: usize) -> Vec<BTreeSet<usize>> {
        (0..n)
            .map(|i| [(i + 1) % n, (i + n - 1) % n].into_iter().collect())
            .collect()
    }

    #[test]
    fn component_counts() {
        let nb = ring(6);
        assert_eq!(connectivity_components(&[2], &nb), 1);
        assert_eq!(connectivity_components(&[2, 3], &nb), 1);
        assert_eq!(connectivity_components(&[0, 3], &nb), 2);
        assert_eq!(connectivity_components(&[0, 1, 3, 4], &nb), 2);
    }

    fn ring_params(p_d: f64, n: usize, sizes: Vec<usize>) -> SpatialRangeParams {
        SpatialRangeParams {
            p_d,
            species_sizes: sizes,
            island_attractivity: vec![1.0 / n as f64; n],
            neighbors: ring(n),
            region_names: (0..n).map(|i| format!("r{}", i)).collect(),
        }
    }

    #[test]
    fn zero_disjunction_gives_connected_ranges() {
        let params = ring_params(0.0, 10, vec![2, 3, 4, 5]);
        let data = sample_spatial(&params, 50, 3).unwrap();
        for i in 0..data.n_species() {
            let range = data.range_of(i);
            assert_eq!(connectivity_components(&range, data.neighbors()), 1);
        }
        assert!((observed_qd(&data).unwrap() - 0.0).abs() < 1e-15);
    }

    #[test]
    fn singleton_species_follow_attractivity() {
        let mut params = ring_params(0.0, 4, vec![1]);
        params.island_attractivity = vec![0.4, 0.3, 0.2, 0.1];
        let data = sample_spatial(&params, 4000, 5).unwrap();
        for r in 0..4 {
            let freq = (0..4000).filter(|&i| data.present(i, r)).count() as f64 / 4000.0;
            let p = params.island_attractivity[r];
            assert!(
                (freq - p).abs() < 2.58 * (p * (1.0 - p) / 4000.0).sqrt() + 0.005,
                "region {}: {} vs {}",
                r,
                freq,
                p
            );
        }
    }

    #[test]
    fn sampled_sizes_follow_support() {
        let params = ring_params(0.3, 8, vec![2, 5]);
        let data = sample_spatial(&params, 100, 1).unwrap();
        for i in 0..100 {
            let s = data.range_of(i).len();
            assert!(s == 2 || s == 5);
        }
    }

    #[test]
    fn mean_qd_nondecreasing_in_pd() {
        let base = ring_params(0.0, 12, vec![2, 3, 4]);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut last = -1.0;
        for p in [0.0, 0.25, 0.5, 0.75] {
            let q = simulate_mean_qd(&base, p, 100, 30, &mut rng).unwrap();
            assert!(q >= last - 0.02, "q_d at p = {} regressed: {} < {}", p, q, last);
            last = q;
        }
    }

    #[test]
    fn estimate_inverts_own_simulations() {
        let truth = ring_params(0.4, 12, vec![2, 3, 4, 5]);
        let data = sample_spatial(&truth, 200, 17).unwrap();
        let (params, report) = estimate_spatial(&data, &default_grid(), 20, 23).unwrap();
        assert!((params.p_d - 0.4).abs() < 0.12, "estimate = {}", params.p_d);
        assert!(report.slope > 0.0);
        assert!(params.p_d >= 0.0 && params.p_d <= 1.0);
    }

    #[test]
    fn qd_error_when_all_singletons() {
        let params = ring_params(0.0, 5, vec![1]);
        let data = sample_spatial(&params, 10, 2).unwrap();
        assert!(observed_qd(&data).is_err());
    }
}
