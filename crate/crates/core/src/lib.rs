//! A deterministic simulator for an artificial chemistry whose molecules are
//! short real vectors that act both as data and as convolution kernels.
//!
//! Molecules of length 13, 7 and 3 catalyse encode (cross-correlation) and
//! decode (transposed correlation) reactions on one another. Each generation
//! is resampled from the reaction products, and the population is scored by
//! how well round trips through the shorter kinds reconstruct the originals.

pub mod config;
pub mod engine;
pub mod error;
pub mod kernel;
pub mod metrics;
pub mod molecule;
pub mod network;
pub mod output;
pub mod pca;
pub mod population;
pub mod rng;
pub mod sampler;
pub mod snapshot;

pub use config::{default_pathways, load_config, MetricsConfig, NoiseConfig, NoiseKind, SimConfig};
pub use engine::{advance, Engine, RunEvent, RunState};
pub use error::{ChemError, ConfigError, RunError, SnapshotError};
pub use kernel::{
    activation, apply_conv, apply_deconv, conv_linear, conv_output_length, deconv_linear,
    deconv_output_length, ConvSpec, Direction,
};
pub use metrics::{
    chain_errors, cluster_count, cluster_count_flat, compute_metrics, detect_convergence, mse,
    nearest_neighbor_mse, reconstruction_error, EvalStream, MetricsRecord, Pathway,
};
pub use molecule::{Molecule, MoleculeKind};
pub use network::{default_network, react, ReactionNetwork, ReactionRule};
pub use pca::{pca_project, pca_project_flat, PcaProjection};
pub use population::{init_population, perturb, perturb_molecule, KindPool, Population};
pub use rng::{Purpose, SlotRng, StreamKey};
pub use sampler::{enumerate_pool, sample_product, PoolEntry, ProductSampler};
pub use snapshot::Snapshot;
