//! Clustering with multivariate edge features under a planted partition model.
//!
//! Labeled node pairs are used to estimate the densities of intra-cluster
//! (`P1`) and inter-cluster (`P0`) edge features. The log-odds of every
//! observed edge then defines a signed, weighted graph whose minimum-
//! disagreement partition is the maximum-likelihood clustering. That
//! correlation clustering instance is solved with an LP relaxation over
//! triangle inequalities followed by region-growing rounding.
//!
//! The crate is `no_std` (with `alloc`) when built without the default
//! `std` feature. File formats, the pipeline driver and the CLI live in the
//! `edgeclust` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod analysis;
pub mod baselines;
pub mod corrclust;
pub mod datagen;
pub mod density;
pub mod edge_features;
mod error;
pub mod linalg;
pub mod metrics;
pub mod partition;

pub use error::{Error, Result};
pub use linalg::Matrix;
pub use metrics::{score, ScoreReport};
pub use partition::{same_cluster, validate_partition, PairIndex, Partition, SampleSet};
