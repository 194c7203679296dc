//! The clustering computations applied by the bootstrap pipelines: PAM,
//! average/complete linkage, classical MDS, and Gaussian mixtures with a
//! uniform noise component.

pub mod gmm;
pub mod linkage;
pub mod mds;
pub mod pam;

pub use gmm::{gmm_noise_fit, GmmConfig, GmmFit};
pub use linkage::{cut_tree, linkage_cluster, DendrogramModel, Linkage, Merge};
pub use mds::{classical_mds, euclidean_matrix};
pub use pam::{pam, PamResult};
