//! The parametric bootstrap engine: estimates a null model from the data,
//! draws m replicate datasets, runs the identical
//! distance/clustering/index pipeline on the original and every replicate,
//! and derives per-k and aggregated p-values plus the calibrated index.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clustering::{
    classical_mds, cut_tree, gmm_noise_fit, linkage_cluster, pam, GmmConfig, Linkage,
};
use crate::data::{
    CategoricalSeriesDataset, DissimilarityMatrix, MixedDataset, PresenceAbsenceData,
};
use crate::dissimilarity::{
    kulczynski_matrix, mixed_type_distance, series_distance, MixedDistanceConfig, SeriesCostMatrix,
};
use crate::error::{Error, Result};
use crate::nullmodel::{
    estimate_latent_gaussian, estimate_markov, estimate_spatial, sample_latent_gaussian,
    sample_markov, sample_spatial, NullModelParams,
};
use crate::validation::{
    adjusted_bic_profile, asw, bic, prediction_strength, BicAdjustment,
    PredictionStrengthConfig, PsMethod,
};

/// One of the three data shapes the engine can bootstrap.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Dataset {
    Mixed(MixedDataset),
    Series(CategoricalSeriesDataset),
    PresenceAbsence(PresenceAbsenceData),
}

impl Dataset {
    pub fn n(&self) -> usize {
        match self {
            Dataset::Mixed(d) => d.n(),
            Dataset::Series(d) => d.n(),
            Dataset::PresenceAbsence(d) => d.n_species(),
        }
    }

    pub fn shape_name(&self) -> &'static str {
        match self {
            Dataset::Mixed(_) => "mixed",
            Dataset::Series(_) => "series",
            Dataset::PresenceAbsence(_) => "presence-absence",
        }
    }
}

/// Null-model family selection with its estimation settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum NullModelChoice {
    LatentGaussian {
        #[serde(default = "default_cont_bins")]
        cont_bins: usize,
    },
    Markov,
    Spatial {
        #[serde(default = "crate::nullmodel::spatial::default_grid")]
        grid: Vec<f64>,
        #[serde(default = "default_disjunction_reps")]
        reps_per_value: usize,
    },
}

fn default_cont_bins() -> usize {
    10
}

fn default_disjunction_reps() -> usize {
    20
}

/// Clustering method applied to the original and every replicate.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum MethodChoice {
    Pam,
    AverageLinkage,
    CompleteLinkage,
    /// MDS to `q` dimensions followed by Gaussian mixture fitting.
    GmmNoise {
        q: usize,
        #[serde(default = "default_true")]
        with_noise: bool,
        #[serde(default)]
        gmm: GmmConfigOpt,
    },
}

fn default_true() -> bool {
    true
}

/// GMM settings with spec defaults.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct GmmConfigOpt {
    pub restarts: usize,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for GmmConfigOpt {
    fn default() -> Self {
        let c = GmmConfig::default();
        GmmConfigOpt {
            restarts: c.restarts,
            max_iter: c.max_iter,
            tol: c.tol,
        }
    }
}

impl From<GmmConfigOpt> for GmmConfig {
    fn from(o: GmmConfigOpt) -> Self {
        GmmConfig {
            restarts: o.restarts,
            max_iter: o.max_iter,
            tol: o.tol,
            ..GmmConfig::default()
        }
    }
}

/// Validation index used as the bootstrap test statistic.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "index", rename_all = "kebab-case")]
pub enum IndexChoice {
    Asw,
    PredictionStrength {
        #[serde(default = "default_ps_b")]
        b: usize,
    },
    /// BIC profile; `adjustment = None` uses raw BIC values.
    BicProfile {
        #[serde(default)]
        adjustment: Option<BicAdjustment>,
    },
}

fn default_ps_b() -> usize {
    50
}

/// Full pipeline specification for one bootstrap run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineSpec {
    pub null_model: NullModelChoice,
    pub method: MethodChoice,
    pub index: IndexChoice,
    /// Candidate cluster counts.
    pub k_values: Vec<usize>,
    /// Replicate count.
    pub m: usize,
    pub seed: u64,
    #[serde(default)]
    pub mixed_distance: Option<MixedDistanceConfig>,
    #[serde(default)]
    pub series_costs: Option<SeriesCostMatrix>,
    /// Worker thread count; must not affect the numbers.
    #[serde(default)]
    pub workers: Option<usize>,
    /// Emit per-batch progress on standard error.
    #[serde(default)]
    pub progress: bool,
}

impl PipelineSpec {
    pub fn validate(&self, data: &Dataset) -> Result<()> {
        if self.m < 1 {
            return Err(Error::config("m >= 1 required"));
        }
        if self.k_values.is_empty() {
            return Err(Error::config("K must be nonempty"));
        }
        let mut sorted = self.k_values.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.k_values.len() {
            return Err(Error::config("K must not contain duplicates"));
        }
        match &self.index {
            IndexChoice::Asw | IndexChoice::PredictionStrength { .. } => {
                if self.k_values.contains(&1) {
                    return Err(Error::config("K must exclude k = 1 for ASW and PS"));
                }
                if matches!(self.method, MethodChoice::GmmNoise { .. }) {
                    return Err(Error::config(
                        "ASW and PS require a distance-based method (pam or linkage)",
                    ));
                }
            }
            IndexChoice::BicProfile { adjustment } => {
                if !matches!(self.method, MethodChoice::GmmNoise { .. }) {
                    return Err(Error::config("the BIC index requires the gmm-noise method"));
                }
                if adjustment.is_some() && !self.k_values.contains(&1) {
                    return Err(Error::config("adjusted BIC requires k = 1 in K"));
                }
            }
        }
        match (data, &self.null_model) {
            (Dataset::Mixed(_), NullModelChoice::LatentGaussian { .. })
            | (Dataset::Series(_), NullModelChoice::Markov)
            | (Dataset::PresenceAbsence(_), NullModelChoice::Spatial { .. }) => Ok(()),
            _ => Err(Error::config(format!(
                "shape mismatch: {} data cannot be fitted by the selected null-model family",
                data.shape_name()
            ))),
        }
    }
}

/// Complete outcome of a bootstrap run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub schema_version: u32,
    pub k_values: Vec<usize>,
    pub observed: BTreeMap<usize, f64>,
    /// m x |K| replicate index values, replicate-major.
    pub replicates: Vec<Vec<f64>>,
    pub per_k_p: BTreeMap<usize, f64>,
    /// Mean-rank aggregation (the default).
    pub aggregate_p: f64,
    pub aggregate_p_mean_raw: f64,
    pub aggregate_p_bonferroni: f64,
    pub calibrated: BTreeMap<usize, f64>,
    pub k_hat: usize,
    pub ev: BTreeMap<usize, f64>,
    pub sv: BTreeMap<usize, f64>,
    pub m: usize,
    pub seed: u64,
    /// The run configuration echoed for provenance.
    pub config_echo: Option<serde_json::Value>,
}

pub const RESULT_SCHEMA_VERSION: u32 = 1;

/// SplitMix64-style seed derivation: replicate q's seed depends only on the
/// master seed and q, so growing m leaves earlier replicates unchanged.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = master
        .wrapping_add(stream.wrapping_mul(0x9E3779B97F4A7C15))
        .wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Eq.-style per-k bootstrapped p-value: `(|{q: V_q >= observed}| + 1)/(m+1)`.
pub fn per_k_pvalue(observed_vk: f64, replicate_vs: &[f64]) -> f64 {
    let m = replicate_vs.len();
    let count = replicate_vs.iter().filter(|&&v| v >= observed_vk).count();
    (count + 1) as f64 / (m + 1) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AggregationMode {
    MeanRank,
    MeanRaw,
    Bonferroni,
}

/// Aggregate the per-k tests into one homogeneity p-value.
///
/// `observed` maps k to V(X, C(X,k)); `replicates` is replicate-major with
/// columns ordered as `k_values`.
pub fn aggregate_pvalue(
    k_values: &[usize],
    observed: &BTreeMap<usize, f64>,
    replicates: &[Vec<f64>],
    mode: AggregationMode,
) -> f64 {
    let m = replicates.len();
    let kn = k_values.len();
    match mode {
        AggregationMode::Bonferroni => {
            let min_p = k_values
                .iter()
                .enumerate()
                .map(|(col, k)| {
                    let column: Vec<f64> = replicates.iter().map(|r| r[col]).collect();
                    per_k_pvalue(observed[k], &column)
                })
                .fold(f64::INFINITY, f64::min);
            (kn as f64 * min_p).min(1.0)
        }
        AggregationMode::MeanRank => {
            // Value table with the observed dataset as row m.
            let mut table: Vec<Vec<f64>> = replicates.to_vec();
            table.push(k_values.iter().map(|k| observed[k]).collect());
            let rank_sum = |i: usize| -> f64 {
                (0..kn)
                    .map(|col| {
                        let count = (0..=m)
                            .filter(|&j| j != i && table[j][col] >= table[i][col])
                            .count();
                        (count + 1) as f64 / (m + 1) as f64
                    })
                    .sum()
            };
            let observed_sum = rank_sum(m);
            let count = (0..m).filter(|&i| rank_sum(i) <= observed_sum).count();
            (count + 1) as f64 / (m + 1) as f64
        }
        AggregationMode::MeanRaw => {
            let observed_sum: f64 = k_values.iter().map(|k| observed[k]).sum();
            let count = replicates
                .iter()
                .filter(|r| r.iter().sum::<f64>() >= observed_sum)
                .count();
            (count + 1) as f64 / (m + 1) as f64
        }
    }
}

/// Calibrated index `(V_obs - EV_k)/SV_k` per k and the maximizing k-hat
/// (ties broken toward the smallest k). SV_k = 0 maps to +/- infinity or 0
/// depending on the sign of the deviation.
pub fn calibrate_and_select(
    k_values: &[usize],
    observed: &BTreeMap<usize, f64>,
    replicates: &[Vec<f64>],
) -> Result<(BTreeMap<usize, f64>, BTreeMap<usize, f64>, BTreeMap<usize, f64>, usize)> {
    let m = replicates.len();
    if m < 2 {
        return Err(Error::config("calibration requires m >= 2"));
    }
    let mut ev = BTreeMap::new();
    let mut sv = BTreeMap::new();
    let mut calibrated = BTreeMap::new();
    for (col, &k) in k_values.iter().enumerate() {
        let column: Vec<f64> = replicates.iter().map(|r| r[col]).collect();
        let mean = column.iter().sum::<f64>() / m as f64;
        let sd = (column.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1) as f64).sqrt();
        let v = observed[&k];
        let c = if sd == 0.0 {
            match v.partial_cmp(&mean).unwrap() {
                std::cmp::Ordering::Greater => f64::INFINITY,
                std::cmp::Ordering::Less => f64::NEG_INFINITY,
                std::cmp::Ordering::Equal => 0.0,
            }
        } else {
            (v - mean) / sd
        };
        ev.insert(k, mean);
        sv.insert(k, sd);
        calibrated.insert(k, c);
    }
    let mut sorted_k: Vec<usize> = k_values.to_vec();
    sorted_k.sort_unstable();
    let mut k_hat = sorted_k[0];
    for &k in &sorted_k {
        if calibrated[&k] > calibrated[&k_hat] {
            k_hat = k;
        }
    }
    Ok((calibrated, ev, sv, k_hat))
}

/// Estimate the selected null-model family from the data.
pub fn estimate_null(data: &Dataset, choice: &NullModelChoice, seed: u64) -> Result<NullModelParams> {
    match (data, choice) {
        (Dataset::Mixed(d), NullModelChoice::LatentGaussian { cont_bins }) => Ok(
            NullModelParams::LatentGaussian(estimate_latent_gaussian(d, *cont_bins)?),
        ),
        (Dataset::Series(d), NullModelChoice::Markov) => {
            let (params, warnings) = estimate_markov(d)?;
            for w in warnings {
                eprintln!("warning: {}", w);
            }
            Ok(NullModelParams::Markov(params))
        }
        (Dataset::PresenceAbsence(d), NullModelChoice::Spatial { grid, reps_per_value }) => {
            let (params, report) = estimate_spatial(d, grid, *reps_per_value, seed)?;
            Ok(NullModelParams::Spatial { params, report })
        }
        _ => Err(Error::config(format!(
            "shape mismatch: {} data cannot be fitted by the selected null-model family",
            data.shape_name()
        ))),
    }
}

/// Draw one replicate dataset of the original's size.
pub fn sample_null(params: &NullModelParams, n: usize, seed: u64) -> Result<Dataset> {
    match params {
        NullModelParams::LatentGaussian(p) => {
            Ok(Dataset::Mixed(sample_latent_gaussian(p, n, seed)?))
        }
        NullModelParams::Markov(p) => Ok(Dataset::Series(sample_markov(p, n, seed)?)),
        NullModelParams::Spatial { params, .. } => {
            Ok(Dataset::PresenceAbsence(sample_spatial(params, n, seed)?))
        }
    }
}

fn dissimilarity_of(data: &Dataset, spec: &PipelineSpec) -> Result<DissimilarityMatrix> {
    match data {
        Dataset::Mixed(d) => {
            let cfg = spec
                .mixed_distance
                .clone()
                .unwrap_or_else(|| MixedDistanceConfig::unit(d));
            mixed_type_distance(d, &cfg)
        }
        Dataset::Series(d) => {
            let costs = spec
                .series_costs
                .clone()
                .unwrap_or_else(|| SeriesCostMatrix::all_ones(d.h()));
            series_distance(d, &costs)
        }
        Dataset::PresenceAbsence(d) => kulczynski_matrix(d),
    }
}

/// Run the full distance -> clustering -> index pipeline on one dataset and
/// return the index value per candidate k.
pub fn evaluate_pipeline(
    data: &Dataset,
    spec: &PipelineSpec,
    eval_seed: u64,
) -> Result<BTreeMap<usize, f64>> {
    let d = dissimilarity_of(data, spec)?;
    match &spec.index {
        IndexChoice::Asw => {
            let mut out = BTreeMap::new();
            for &k in &spec.k_values {
                let part = match &spec.method {
                    MethodChoice::Pam => pam(&d, k)?.partition,
                    MethodChoice::AverageLinkage => {
                        cut_tree(&linkage_cluster(&d, Linkage::Average)?, k)?
                    }
                    MethodChoice::CompleteLinkage => {
                        cut_tree(&linkage_cluster(&d, Linkage::Complete)?, k)?
                    }
                    MethodChoice::GmmNoise { .. } => unreachable!("rejected by validate"),
                };
                out.insert(k, asw(&d, &part)?);
            }
            Ok(out)
        }
        IndexChoice::PredictionStrength { b } => {
            let method = match &spec.method {
                MethodChoice::Pam => PsMethod::Pam,
                MethodChoice::AverageLinkage => PsMethod::AverageLinkage,
                MethodChoice::CompleteLinkage => PsMethod::CompleteLinkage,
                MethodChoice::GmmNoise { .. } => unreachable!("rejected by validate"),
            };
            let mut out = BTreeMap::new();
            for &k in &spec.k_values {
                let cfg = PredictionStrengthConfig {
                    b: *b,
                    method,
                    seed: derive_seed(eval_seed, 0x9D5 ^ k as u64),
                };
                out.insert(k, prediction_strength(&d, k, &cfg)?);
            }
            Ok(out)
        }
        IndexChoice::BicProfile { adjustment } => {
            let MethodChoice::GmmNoise { q, with_noise, gmm } = &spec.method else {
                unreachable!("rejected by validate")
            };
            let coords = classical_mds(&d, *q)?;
            let mut bics = BTreeMap::new();
            for &k in &spec.k_values {
                let fit = gmm_noise_fit(
                    &coords,
                    k,
                    *with_noise,
                    &GmmConfig::from(*gmm),
                    derive_seed(eval_seed, 0x6A11 ^ k as u64),
                )?;
                bics.insert(k, bic(&fit, data.n()));
            }
            match adjustment {
                Some(adj) => adjusted_bic_profile(&bics, *adj),
                None => Ok(bics),
            }
        }
    }
}

/// Full bootstrap run: estimate once, evaluate the original, evaluate m
/// replicates (each retried up to 3 times on pipeline failure), aggregate.
pub fn run_bootstrap(data: &Dataset, spec: &PipelineSpec) -> Result<BootstrapResult> {
    spec.validate(data)?;
    let params = estimate_null(data, &spec.null_model, derive_seed(spec.seed, 0))?;
    run_bootstrap_with_params(data, spec, &params)
}

/// Like `run_bootstrap` but with null parameters already estimated.
pub fn run_bootstrap_with_params(
    data: &Dataset,
    spec: &PipelineSpec,
    params: &NullModelParams,
) -> Result<BootstrapResult> {
    spec.validate(data)?;
    let n = data.n();
    let observed = evaluate_pipeline(data, spec, derive_seed(spec.seed, u64::MAX))?;

    let run_replicate = |q: usize| -> Result<Vec<f64>> {
        let mut last = None;
        for attempt in 0..3u64 {
            let seed = derive_seed(spec.seed, (q as u64 + 1) | (attempt << 48));
            let result = sample_null(params, n, seed)
                .and_then(|replicate| evaluate_pipeline(&replicate, spec, seed));
            match result {
                Ok(values) => {
                    if spec.progress {
                        let batch = (spec.m / 10).max(1);
                        if (q + 1) % batch == 0 {
                            eprintln!("replicate {}/{} done", q + 1, spec.m);
                        }
                    }
                    return Ok(spec.k_values.iter().map(|k| values[k]).collect());
                }
                Err(e) => last = Some((seed, e)),
            }
        }
        let (seed, e) = last.unwrap();
        Err(Error::Replicate {
            replicate: q,
            attempts: 3,
            seed,
            message: e.to_string(),
        })
    };

    let replicates: Result<Vec<Vec<f64>>> = match spec.workers {
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::config(e.to_string()))?;
            pool.install(|| (0..spec.m).into_par_iter().map(run_replicate).collect())
        }
        None => (0..spec.m).into_par_iter().map(run_replicate).collect(),
    };
    let replicates = replicates?;

    let mut per_k_p = BTreeMap::new();
    for (col, &k) in spec.k_values.iter().enumerate() {
        let column: Vec<f64> = replicates.iter().map(|r| r[col]).collect();
        per_k_p.insert(k, per_k_pvalue(observed[&k], &column));
    }
    let aggregate_p = aggregate_pvalue(&spec.k_values, &observed, &replicates, AggregationMode::MeanRank);
    let aggregate_p_mean_raw =
        aggregate_pvalue(&spec.k_values, &observed, &replicates, AggregationMode::MeanRaw);
    let aggregate_p_bonferroni =
        aggregate_pvalue(&spec.k_values, &observed, &replicates, AggregationMode::Bonferroni);
    let (calibrated, ev, sv, k_hat) = if spec.m >= 2 {
        calibrate_and_select(&spec.k_values, &observed, &replicates)?
    } else {
        (BTreeMap::new(), BTreeMap::new(), BTreeMap::new(), *spec.k_values.iter().min().unwrap())
    };

    Ok(BootstrapResult {
        schema_version: RESULT_SCHEMA_VERSION,
        k_values: spec.k_values.clone(),
        observed,
        replicates,
        per_k_p,
        aggregate_p,
        aggregate_p_mean_raw,
        aggregate_p_bonferroni,
        calibrated,
        k_hat,
        ev,
        sv,
        m: spec.m,
        seed: spec.seed,
        config_echo: serde_json::to_value(spec).ok(),
    })
}
