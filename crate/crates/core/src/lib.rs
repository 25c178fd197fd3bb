//! Weight initialization laboratory for small multilayer perceptrons.
//!
//! The centerpiece is [`init_sinl`], a shrinkage initializer that rotates
//! boundary layer pairs with the singular vectors of the least-squares bridge
//! between their data, working inward until the median layer is reached.
//! Random, batch-normalization style, orthonormal (DIN) and LSUV baselines sit
//! next to it, together with a full-batch trainer and dataset utilities for
//! comparing them.

pub mod data;
mod error;
pub mod initializers;
pub mod network;
pub mod numerics;
pub mod training;

pub use data::{load_csv, one_hot, split, split_indices, standardize, synth_blobs, Dataset, LabelColumn};
pub use error::{Error, Result};
pub use initializers::{
    compute_bridge, init_bn, init_din, init_lsuv, init_random, init_sinl, init_sinl_traced, initialize,
    median_normalize, normalize_output_variance, sinl_pair_update, BridgeResult, InitSpec, Scheme, SinlStep,
};
pub use network::{
    accuracy, activation_apply, backward, forward, objective_mse, ActivationKind, Dropout, ForwardCache, Gradients,
    Layer, NetworkParams,
};
pub use numerics::{
    gaussian_matrix, matmul, orthogonal_factor, pinv, seeded_rng, svd_full, Matrix, SeededRng, SvdResult,
};
pub use training::{evaluate, train, MetricsRecord, TrainConfig};
