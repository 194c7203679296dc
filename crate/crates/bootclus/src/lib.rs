//! Parametric bootstrap tests for clustering: fit a null model that encodes
//! the data's non-clustering structure, simulate replicate datasets from it,
//! run one clustering pipeline on everything, and compare validation-index
//! values to decide whether the data cluster at all and, if so, into how
//! many groups.
//!
//! Three data shapes are supported, each with its own null-model family:
//! mixed-type tables (latent Gaussian copula), categorical dosage series
//! (day-dependent Markov chains), and species presence-absence ranges
//! (spatial range simulation). See the `examples/` directory for one
//! runnable walkthrough per capability.

pub mod bootstrap;
pub mod clustering;
pub mod config;
pub mod data;
pub mod dissimilarity;
pub mod error;
pub mod export;
pub mod nullmodel;
pub mod validation;

pub use bootstrap::{
    aggregate_pvalue, calibrate_and_select, derive_seed, estimate_null, evaluate_pipeline,
    per_k_pvalue, run_bootstrap, run_bootstrap_with_params, sample_null, AggregationMode,
    BootstrapResult, Dataset, IndexChoice, MethodChoice, NullModelChoice, PipelineSpec,
};
pub use error::{Error, Result};
