//! Thin command-line front end over the library: estimate a null model,
//! sample from fitted parameters, run a full bootstrap, or re-render a
//! report from a saved result.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bootclus::bootstrap::{run_bootstrap_with_params, sample_null, RESULT_SCHEMA_VERSION};
use bootclus::config::RunConfig;
use bootclus::data::{write_mixed_csv, write_neighbors, write_presence_absence, write_series_csv};
use bootclus::error::Error;
use bootclus::export::{
    read_result_json, summary_text, write_result_json, write_validity_plot_svg,
    write_value_matrix_csv,
};
use bootclus::nullmodel::NullModelParams;
use bootclus::{estimate_null, Dataset};

#[derive(Parser)]
#[command(name = "bootclus", version, about = "Parametric bootstrap tests for clustering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the configured null model and write its parameters as JSON.
    EstimateNull {
        #[arg(long)]
        config: PathBuf,
        /// Parameter output path.
        #[arg(long)]
        out: PathBuf,
        /// Overrides the config seed (spatial calibration only).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Draw one synthetic dataset from fitted parameters.
    Sample {
        /// Parameter JSON written by estimate-null.
        #[arg(long)]
        params: PathBuf,
        /// Number of objects (rows, series, or species).
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        /// Dataset output path; presence-absence also writes `<out>.neighbors`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the full bootstrap and write JSON, CSV, and SVG outputs.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the config worker count; never changes the numbers.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Regenerate the plot and summary from a saved result without recomputation.
    Report {
        /// Result JSON written by run.
        #[arg(long)]
        result: PathBuf,
        /// Plot output path; defaults next to the result file.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e);
            match e {
                Error::Config(_) | Error::Data(_) | Error::Parse { .. } => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn dispatch(command: Command) -> bootclus::Result<()> {
    match command {
        Command::EstimateNull { config, out, seed } => cmd_estimate_null(&config, &out, seed),
        Command::Sample { params, n, seed, out } => cmd_sample(&params, n, seed, &out),
        Command::Run { config, seed, workers } => cmd_run(&config, seed, workers),
        Command::Report { result, svg } => cmd_report(&result, svg.as_deref()),
    }
}

/// Missing user-supplied inputs are validation errors (exit 1), not runtime
/// failures, so existence is checked before any read.
fn require_file(path: &Path, what: &str) -> bootclus::Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::config(format!("{} not found: {}", what, path.display())))
    }
}

fn read_params(path: &Path) -> bootclus::Result<NullModelParams> {
    require_file(path, "parameter file")?;
    let text = fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::parse(path.display().to_string(), e.to_string()))
}

fn cmd_estimate_null(config: &Path, out: &Path, seed: Option<u64>) -> bootclus::Result<()> {
    let cfg = RunConfig::load(config)?;
    let data = cfg.load_dataset()?;
    let seed = seed.unwrap_or(cfg.pipeline.seed);
    let params = estimate_null(&data, &cfg.null_model, seed)?;
    let text = serde_json::to_string_pretty(&params)
        .map_err(|e| Error::numeric(e.to_string()))?;
    fs::write(out, text).map_err(|e| Error::io(out.display().to_string(), e))?;
    eprintln!("fitted {} null model -> {}", params.family_name(), out.display());
    match &params {
        NullModelParams::LatentGaussian(p) => {
            eprintln!("  variables: {}", p.specs.len());
            eprintln!("  correlation PSD projection max shift: {:.3e}", p.projection_max_shift);
        }
        NullModelParams::Markov(p) => {
            eprintln!("  categories: {}, series length: {}", p.h, p.t_len);
        }
        NullModelParams::Spatial { params, report } => {
            eprintln!("  observed q_d: {:.4}", report.observed_qd);
            eprintln!("  regression slope: {:.4}", report.slope);
            eprintln!("  estimated p_d: {:.4}", params.p_d);
        }
    }
    Ok(())
}

fn cmd_sample(params: &Path, n: usize, seed: u64, out: &Path) -> bootclus::Result<()> {
    let params = read_params(params)?;
    let dataset = sample_null(&params, n, seed)?;
    match &dataset {
        Dataset::Mixed(d) => write_mixed_csv(d, out)?,
        Dataset::Series(d) => write_series_csv(d, out)?,
        Dataset::PresenceAbsence(d) => {
            write_presence_absence(d, out)?;
            let mut neighbors = out.as_os_str().to_owned();
            neighbors.push(".neighbors");
            write_neighbors(d, Path::new(&neighbors))?;
        }
    }
    eprintln!("sampled {} {} objects -> {}", n, dataset.shape_name(), out.display());
    Ok(())
}

fn cmd_run(config: &Path, seed: Option<u64>, workers: Option<usize>) -> bootclus::Result<()> {
    let cfg = RunConfig::load(config)?;
    let data = cfg.load_dataset()?;
    let mut spec = cfg.pipeline_spec(true);
    if let Some(s) = seed {
        spec.seed = s;
    }
    if let Some(w) = workers {
        spec.workers = Some(w);
    }
    spec.validate(&data)?;
    let params = estimate_null(&data, &spec.null_model, bootclus::derive_seed(spec.seed, 0))?;
    let result = run_bootstrap_with_params(&data, &spec, &params)?;

    fs::create_dir_all(&cfg.output.dir)
        .map_err(|e| Error::io(cfg.output.dir.display().to_string(), e))?;
    write_result_json(&result, &cfg.output.dir.join("result.json"))?;
    write_value_matrix_csv(&result, &cfg.output.dir.join("values.csv"))?;
    write_validity_plot_svg(&result, &cfg.output.dir.join("validity.svg"))?;
    print!("{}", summary_text(&result));
    Ok(())
}

fn cmd_report(result: &Path, svg: Option<&Path>) -> bootclus::Result<()> {
    require_file(result, "result file")?;
    let res = read_result_json(result)?;
    if res.schema_version != RESULT_SCHEMA_VERSION {
        return Err(Error::parse(
            result.display().to_string(),
            format!(
                "result schema version {} unsupported (expected {})",
                res.schema_version, RESULT_SCHEMA_VERSION
            ),
        ));
    }
    let svg_path = match svg {
        Some(p) => p.to_path_buf(),
        None => result.with_extension("svg"),
    };
    write_validity_plot_svg(&res, &svg_path)?;
    print!("{}", summary_text(&res));
    eprintln!("plot -> {}", svg_path.display());
    Ok(())
}
