use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::kmeans::{kmeans_matrix, KMEANS_RESTARTS};
use crate::linalg::symmetric_eigen;
use crate::{Error, Matrix, Partition, Result, SampleSet};

/// Weight of the self-loop given to nodes with no mutual neighbor.
const ISOLATED_SELF_LOOP: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralConfig {
    pub knn: usize,
    /// Gaussian width; `None` uses the median pairwise distance.
    pub sigma: Option<f64>,
    pub k: usize,
}

impl SpectralConfig {
    pub fn new(k: usize) -> Self {
        Self { knn: 20, sigma: None, k }
    }

    fn validate(&self) -> Result<()> {
        if self.knn == 0 {
            return Err(Error::InvalidParameter("spectral knn must be >= 1".into()));
        }
        if self.k == 0 {
            return Err(Error::InvalidParameter("spectral k must be >= 1".into()));
        }
        if let Some(s) = self.sigma {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::InvalidParameter(alloc::format!("spectral sigma {s} must be positive")));
            }
        }
        Ok(())
    }
}

fn distances(x: &Matrix) -> Matrix {
    let n = x.rows();
    let mut d = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v = x.row(i).iter().zip(x.row(j)).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    d
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Gaussian affinities kept only between mutual `knn`-nearest neighbors.
/// Nodes left without any positive weight get a tiny self-loop.
pub fn mutual_knn_affinity(x: &Matrix, knn: usize, sigma: Option<f64>) -> Result<Matrix> {
    let n = x.rows();
    if n == 0 {
        return Err(Error::Empty("spectral input"));
    }
    let d = distances(x);
    let sigma = match sigma {
        Some(s) => s,
        None => {
            let mut all = Vec::with_capacity(n * n.saturating_sub(1) / 2);
            for i in 0..n {
                for j in i + 1..n {
                    all.push(d[(i, j)]);
                }
            }
            let m = median(all);
            if m > 0.0 {
                m
            } else {
                1.0
            }
        }
    };
    let kk = knn.min(n.saturating_sub(1));
    let mut neighbor = vec![false; n * n];
    for i in 0..n {
        let mut others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        others.sort_by(|&a, &b| d[(i, a)].total_cmp(&d[(i, b)]).then(a.cmp(&b)));
        for &j in &others[..kk] {
            neighbor[i * n + j] = true;
        }
    }
    let mut w = Matrix::zeros(n, n);
    let denom = 2.0 * sigma * sigma;
    for i in 0..n {
        for j in i + 1..n {
            if neighbor[i * n + j] && neighbor[j * n + i] {
                let v = (-d[(i, j)] * d[(i, j)] / denom).exp();
                w[(i, j)] = v;
                w[(j, i)] = v;
            }
        }
    }
    for i in 0..n {
        if w.row(i).iter().all(|&v| v <= 0.0) {
            w[(i, i)] = ISOLATED_SELF_LOOP;
        }
    }
    Ok(w)
}

/// `I - D^-1 W`.
pub fn random_walk_laplacian(w: &Matrix) -> Matrix {
    let n = w.rows();
    let mut l = Matrix::zeros(n, n);
    for i in 0..n {
        let deg: f64 = w.row(i).iter().sum();
        for j in 0..n {
            let id = if i == j { 1.0 } else { 0.0 };
            l[(i, j)] = id - w[(i, j)] / deg;
        }
    }
    l
}

/// Spectral clustering with the random-walk Laplacian. The eigenvectors come
/// from the symmetric form `I - D^-1/2 W D^-1/2` and are rescaled by
/// `D^-1/2`; their rows are clustered by k-means without normalization.
pub fn spectral<R: Rng + ?Sized>(s: &SampleSet, cfg: &SpectralConfig, rng: &mut R) -> Result<Partition> {
    cfg.validate()?;
    let n = s.len();
    if cfg.k > n {
        return Err(Error::InvalidParameter(alloc::format!("spectral needs k <= n, got k={}, n={n}", cfg.k)));
    }
    if cfg.k == 1 {
        return Ok(Partition::single_cluster(n));
    }
    let w = mutual_knn_affinity(s.features(), cfg.knn, cfg.sigma)?;
    let inv_sqrt: Vec<f64> = (0..n).map(|i| 1.0 / w.row(i).iter().sum::<f64>().sqrt()).collect();
    let mut sym = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let id = if i == j { 1.0 } else { 0.0 };
            sym[(i, j)] = id - inv_sqrt[i] * w[(i, j)] * inv_sqrt[j];
        }
    }
    let eig = symmetric_eigen(&sym)?;
    let mut embed = Matrix::zeros(n, cfg.k);
    for i in 0..n {
        for c in 0..cfg.k {
            embed[(i, c)] = eig.vectors[(i, c)] * inv_sqrt[i];
        }
    }
    Ok(kmeans_matrix(&embed, cfg.k, KMEANS_RESTARTS, rng)?.partition)
}
