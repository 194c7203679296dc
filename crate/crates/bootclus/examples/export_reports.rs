//! Exporting bootstrap results: run a small bootstrap, write the versioned
//! JSON, the index-value CSV, and the SVG validity plot, then read the JSON
//! back and confirm the round trip is exact.
//!
//! Run: `cargo run --release --example export_reports`

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use bootclus::data::{MixedDataset, Value, VariableSpec};
use bootclus::export::{
    read_result_json, summary_text, write_result_json, write_validity_plot_svg,
    write_value_matrix_csv,
};
use bootclus::{run_bootstrap, Dataset, IndexChoice, MethodChoice, NullModelChoice, PipelineSpec};

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let specs = vec![
        VariableSpec::continuous("x", 1.0),
        VariableSpec::continuous("y", 1.0),
    ];
    let rows: Vec<Vec<Value>> = (0..60)
        .map(|i| {
            let c = if i < 30 { -2.0 } else { 2.0 };
            vec![
                Value::Real(c + noise.sample(&mut rng)),
                Value::Real(c + noise.sample(&mut rng)),
            ]
        })
        .collect();
    let data = MixedDataset::new(specs, rows).unwrap();

    let spec = PipelineSpec {
        null_model: NullModelChoice::LatentGaussian { cont_bins: 10 },
        method: MethodChoice::Pam,
        index: IndexChoice::Asw,
        k_values: vec![2, 3, 4],
        m: 49,
        seed: 1,
        mixed_distance: None,
        series_costs: None,
        workers: None,
        progress: false,
    };
    let result = run_bootstrap(&Dataset::Mixed(data), &spec).expect("bootstrap");
    print!("{}", summary_text(&result));

    let dir = std::env::temp_dir().join("bootclus_export_demo");
    std::fs::create_dir_all(&dir).unwrap();
    let json = dir.join("result.json");
    write_result_json(&result, &json).unwrap();
    write_value_matrix_csv(&result, &dir.join("values.csv")).unwrap();
    write_validity_plot_svg(&result, &dir.join("validity.svg")).unwrap();
    println!("wrote result.json, values.csv, validity.svg to {}", dir.display());

    let back = read_result_json(&json).unwrap();
    assert_eq!(
        serde_json::to_string(&result).unwrap(),
        serde_json::to_string(&back).unwrap()
    );
    println!("JSON round trip is exact");
}
