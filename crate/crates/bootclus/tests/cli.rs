//! End-to-end tests of the `bootclus` binary: reproducibility of `run`,
//! validation exit codes, `estimate-null`/`sample` round trips, and `report`
//! regeneration from a saved result.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn bootclus(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bootclus"))
        .args(args)
        .output()
        .expect("binary runs")
}

/// Writes a small deterministic mixed dataset, schema, and run config into
/// `dir` and returns the config path. The data has two shifted halves so the
/// pipeline is exercised, but correctness of the numbers is not at issue here.
fn write_fixture(dir: &Path, m: usize, family: &str, out_dir: &Path) -> std::path::PathBuf {
    let data_path = dir.join("data.csv");
    let mut csv = String::from("x,y,flag\n");
    for i in 0..24 {
        let shift = if i < 12 { -2.0 } else { 2.0 };
        // Low-discrepancy jitter keeps the file deterministic without an RNG.
        let j = (i as f64 * 0.618_033_9).fract();
        let flag = if i % 2 == 0 { "no" } else { "yes" };
        csv.push_str(&format!(
            "{:.6},{:.6},{}\n",
            shift + j,
            -shift + (1.0 - j),
            flag
        ));
    }
    fs::write(&data_path, csv).unwrap();

    let schema_path = dir.join("schema.toml");
    fs::write(
        &schema_path,
        "[[variable]]\nname = \"x\"\nkind = \"continuous\"\n\n\
         [[variable]]\nname = \"y\"\nkind = \"continuous\"\n\n\
         [[variable]]\nname = \"flag\"\nkind = \"binary\"\nlevels = [\"no\", \"yes\"]\n",
    )
    .unwrap();

    let config_path = dir.join("run.toml");
    fs::write(
        &config_path,
        format!(
            "[data]\nshape = \"mixed\"\npath = {:?}\nschema = {:?}\n\n\
             [null_model]\nfamily = {:?}\n\n\
             [pipeline]\nmethod = \"pam\"\nindex = \"asw\"\nk = [2, 3]\nm = {}\nseed = 5\n\n\
             [output]\ndir = {:?}\n",
            data_path, schema_path, family, m, out_dir
        ),
    )
    .unwrap();
    config_path
}

#[test]
fn run_is_bit_identical_across_invocations() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let config = write_fixture(dir.path(), 19, "latent-gaussian", &out);

    let first = bootclus(&["run", "--config", config.to_str().unwrap()]);
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    let json1 = fs::read(out.join("result.json")).unwrap();
    let csv1 = fs::read(out.join("values.csv")).unwrap();

    // Re-running the identical config must reproduce result.json bit for bit.
    let second = bootclus(&["run", "--config", config.to_str().unwrap()]);
    assert!(second.status.success());
    assert_eq!(json1, fs::read(out.join("result.json")).unwrap());

    // A different worker count is echoed in the config but must never change
    // the numbers, so values.csv stays bit-identical.
    let workers = bootclus(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--workers",
        "2",
    ]);
    assert!(workers.status.success());
    assert_eq!(csv1, fs::read(out.join("values.csv")).unwrap());

    // A different seed must change them.
    let third = bootclus(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--seed",
        "6",
    ]);
    assert!(third.status.success());
    assert_ne!(json1, fs::read(out.join("result.json")).unwrap());
}

#[test]
fn invalid_config_exits_with_code_1() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let config = write_fixture(dir.path(), 0, "latent-gaussian", &out);
    let res = bootclus(&["run", "--config", config.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("error:"));
}

#[test]
fn shape_family_mismatch_exits_with_code_1() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    // A Markov null cannot be fitted to a mixed-type table.
    let config = write_fixture(dir.path(), 19, "markov", &out);
    let res = bootclus(&["run", "--config", config.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
}

#[test]
fn missing_data_file_exits_with_code_1() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let config = write_fixture(dir.path(), 19, "latent-gaussian", &out);
    fs::remove_file(dir.path().join("data.csv")).unwrap();
    let res = bootclus(&["run", "--config", config.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&res.stderr);
    assert!(stderr.contains("data.csv"), "stderr: {}", stderr);
}

#[test]
fn estimate_null_and_sample_are_reproducible() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let config = write_fixture(dir.path(), 19, "latent-gaussian", &out);
    let params = dir.path().join("params.json");

    let est = bootclus(&[
        "estimate-null",
        "--config",
        config.to_str().unwrap(),
        "--out",
        params.to_str().unwrap(),
    ]);
    assert!(est.status.success(), "{}", String::from_utf8_lossy(&est.stderr));

    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let c = dir.path().join("c.csv");
    for (path, seed) in [(&a, "9"), (&b, "9"), (&c, "10")] {
        let res = bootclus(&[
            "sample",
            "--params",
            params.to_str().unwrap(),
            "--n",
            "30",
            "--seed",
            seed,
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());
}

#[test]
fn report_regenerates_plot_without_recomputation() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let config = write_fixture(dir.path(), 19, "latent-gaussian", &out);
    let run = bootclus(&["run", "--config", config.to_str().unwrap()]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));

    let result = out.join("result.json");
    let svg = dir.path().join("plot.svg");
    let rep = bootclus(&[
        "report",
        "--result",
        result.to_str().unwrap(),
        "--svg",
        svg.to_str().unwrap(),
    ]);
    assert!(rep.status.success(), "{}", String::from_utf8_lossy(&rep.stderr));
    let text = fs::read_to_string(&svg).unwrap();
    // One polyline per replicate plus the observed curve.
    assert_eq!(text.matches("<polyline").count(), 20);
    let stdout = String::from_utf8_lossy(&rep.stdout);
    assert!(stdout.contains("selected k"), "stdout: {}", stdout);

    let missing = bootclus(&["report", "--result", dir.path().join("nope.json").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(1));
}
