//! Clustering test for categorical dosage series. Patients start on one of
//! two regimens (mostly category 2 vs mostly category 4) with occasional
//! missing days. The day-dependent Markov null keeps each day's transition
//! behavior and the missingness pattern but mixes the regimens away, so the
//! test should find the two groups.
//!
//! Run: `cargo run --release --example dosage_series_test`

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bootclus::data::CategoricalSeriesDataset;
use bootclus::export::summary_text;
use bootclus::{run_bootstrap, Dataset, IndexChoice, MethodChoice, NullModelChoice, PipelineSpec};

fn make_series(n_per_group: usize, t_len: usize, seed: u64) -> CategoricalSeriesDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut series = Vec::new();
    for group in 0..2 {
        let home = if group == 0 { 2usize } else { 4 };
        for _ in 0..n_per_group {
            let mut s: Vec<Option<usize>> = Vec::with_capacity(t_len);
            let mut state = home;
            for _ in 0..t_len {
                // Mostly stay near the regimen's home dosage.
                if rng.gen_bool(0.15) {
                    state = (state as i64 + if rng.gen_bool(0.5) { 1 } else { -1 })
                        .clamp(1, 6) as usize;
                } else if rng.gen_bool(0.1) {
                    state = home;
                }
                s.push(if rng.gen_bool(0.05) { None } else { Some(state) });
            }
            series.push(s);
        }
    }
    CategoricalSeriesDataset::new(series, 6, 7).expect("valid series")
}

fn main() {
    let data = make_series(30, 90, 3);
    println!(
        "{} series of length {} over {} categories",
        data.n(),
        data.t_len(),
        data.h()
    );
    let spec = PipelineSpec {
        null_model: NullModelChoice::Markov,
        method: MethodChoice::AverageLinkage,
        index: IndexChoice::PredictionStrength { b: 20 },
        k_values: vec![2, 3, 4],
        m: 99,
        seed: 5,
        mixed_distance: None,
        series_costs: None,
        workers: None,
        progress: true,
    };
    let result = run_bootstrap(&Dataset::Series(data), &spec).expect("bootstrap");
    print!("{}", summary_text(&result));
}
