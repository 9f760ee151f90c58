//! Node-feature baselines that are given the true cluster count.

mod kmeans;
mod spectral;

pub use kmeans::{kmeans, kmeans_matrix, KMeansResult, KMEANS_RESTARTS};
pub use spectral::{mutual_knn_affinity, random_walk_laplacian, spectral, SpectralConfig};
