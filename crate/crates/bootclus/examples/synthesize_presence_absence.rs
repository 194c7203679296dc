//! Regenerates the synthetic 80-species x 34-island presence-absence
//! dataset shipped in `data/`. Most species ranges are drawn from a plain
//! spatial range model; two small groups instead perturb shared archetype
//! ranges, giving the matrix a mild biotic-element structure that
//! independent range sampling cannot reproduce.
//!
//! Run from the crate root: `cargo run --example synthesize_presence_absence`

use std::collections::BTreeSet;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bootclus::data::{write_neighbors, write_presence_absence, PresenceAbsenceData};
use bootclus::nullmodel::{sample_spatial, SpatialRangeParams};

const N_ISLANDS: usize = 34;
const N_BACKGROUND: usize = 48;
const GROUP_SIZE: usize = 16;
const SEED: u64 = 20_240_817;

/// Island chain with extra short-range links every third island.
fn island_adjacency() -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for i in 0..N_ISLANDS - 1 {
        pairs.push((i, i + 1));
    }
    for i in (0..N_ISLANDS - 2).step_by(3) {
        pairs.push((i, i + 2));
    }
    pairs
}

fn neighbor_sets(pairs: &[(usize, usize)]) -> Vec<BTreeSet<usize>> {
    let mut sets = vec![BTreeSet::new(); N_ISLANDS];
    for &(a, b) in pairs {
        sets[a].insert(b);
        sets[b].insert(a);
    }
    sets
}

/// A noisy copy of the archetype block: islands drop out independently and
/// the flanking islands join occasionally.
fn perturbed_range(block: &[usize], rng: &mut ChaCha8Rng) -> Vec<bool> {
    let mut row = vec![false; N_ISLANDS];
    let mut count = 0;
    for &r in block {
        if rng.gen_bool(0.65) {
            row[r] = true;
            count += 1;
        }
    }
    for flank in [block[0].wrapping_sub(1), block[block.len() - 1] + 1] {
        if flank < N_ISLANDS && rng.gen_bool(0.2) {
            row[flank] = true;
            count += 1;
        }
    }
    if count == 0 {
        row[block[rng.gen_range(0..block.len())]] = true;
    }
    row
}

fn main() {
    let pairs = island_adjacency();
    let neighbors = neighbor_sets(&pairs);
    let region_names: Vec<String> = (1..=N_ISLANDS).map(|i| format!("isl{:02}", i)).collect();

    let background = SpatialRangeParams {
        p_d: 0.15,
        species_sizes: vec![2, 2, 3, 3, 4, 4, 5, 5, 6, 7, 8, 10, 12],
        island_attractivity: vec![1.0 / N_ISLANDS as f64; N_ISLANDS],
        neighbors,
        region_names: region_names.clone(),
    };
    let background_data = sample_spatial(&background, N_BACKGROUND, SEED).expect("background");

    let mut matrix: Vec<Vec<bool>> = (0..N_BACKGROUND)
        .map(|i| (0..N_ISLANDS).map(|r| background_data.present(i, r)).collect())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 0xABCD);
    let west_block: Vec<usize> = (2..10).collect();
    let east_block: Vec<usize> = (24..32).collect();
    for block in [&west_block, &east_block] {
        for _ in 0..GROUP_SIZE {
            matrix.push(perturbed_range(block, &mut rng));
        }
    }
    let names: Vec<String> = (1..=matrix.len()).map(|i| format!("sp{:02}", i)).collect();
    let data = PresenceAbsenceData::new(matrix, &pairs, names, region_names).expect("combine");

    let out_dir = Path::new("crates/bootclus/data");
    let out_dir = if out_dir.exists() { out_dir } else { Path::new("data") };
    write_presence_absence(&data, &out_dir.join("snails_matrix.csv")).expect("write matrix");
    write_neighbors(&data, &out_dir.join("snails_neighbors.csv")).expect("write neighbors");
    println!(
        "wrote {} species x {} islands to {}",
        data.n_species(),
        data.n_regions(),
        out_dir.display()
    );
}
