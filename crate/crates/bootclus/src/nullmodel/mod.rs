//! Fitted generative null models encoding "non-clustering structure", with
//! estimators and samplers for each of the three data shapes.

pub mod density;
pub mod latent_gaussian;
pub mod markov;
pub mod polychoric;
pub mod spatial;

use serde::{Deserialize, Serialize};

pub use density::UnimodalDensity;
pub use latent_gaussian::{
    estimate_latent_gaussian, nominal_ordering, sample_latent_gaussian, LatentGaussianParams,
    MarginalModel,
};
pub use markov::{estimate_markov, sample_markov, MarkovDosageParams};
pub use polychoric::{polychoric_correlation, thresholds_from_marginals};
pub use spatial::{
    connectivity_components, estimate_spatial, observed_qd, sample_spatial, DisjunctionReport,
    SpatialRangeParams,
};

/// Fitted parameters of any of the three null-model families, as written to
/// and read from parameter JSON files.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum NullModelParams {
    LatentGaussian(LatentGaussianParams),
    Markov(MarkovDosageParams),
    Spatial {
        params: SpatialRangeParams,
        report: DisjunctionReport,
    },
}

impl NullModelParams {
    pub fn family_name(&self) -> &'static str {
        match self {
            NullModelParams::LatentGaussian(_) => "latent-gaussian",
            NullModelParams::Markov(_) => "markov",
            NullModelParams::Spatial { .. } => "spatial",
        }
    }
}
