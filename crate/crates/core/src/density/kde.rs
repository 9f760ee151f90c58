use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{Density, SampleDensity};
use crate::{Error, Matrix, Result};

/// Lower clamp on a log-density, about `ln(1e-20)`.
pub const LOG_DENSITY_FLOOR: f64 = -46.05;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Gaussian product-kernel density estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityModel {
    pub training_points: Matrix,
    pub bandwidths: Vec<f64>,
    pub log_floor: f64,
}

impl DensityModel {
    /// A model with caller-chosen bandwidths; works for a single training point.
    pub fn with_bandwidths(training_points: Matrix, bandwidths: Vec<f64>) -> Result<Self> {
        if training_points.rows() == 0 {
            return Err(Error::Empty("KDE training points"));
        }
        if bandwidths.len() != training_points.cols() {
            return Err(Error::DimensionMismatch { expected: training_points.cols(), found: bandwidths.len() });
        }
        if !bandwidths.iter().all(|h| h.is_finite() && *h > 0.0) {
            return Err(Error::InvalidParameter("KDE bandwidths must be positive and finite".into()));
        }
        if !training_points.is_finite() {
            return Err(Error::NonFinite("KDE training points"));
        }
        Ok(Self { training_points, bandwidths, log_floor: LOG_DENSITY_FLOOR })
    }

    pub fn len(&self) -> usize {
        self.training_points.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.training_points.rows() == 0
    }
}

/// Fits a KDE with per-dimension Scott bandwidths `h_j = sigma_j * m^(-1/(d+4))`,
/// floored at `1e-6 * (1 + |sigma_j|)`.
pub fn kde_fit(vectors: &Matrix) -> Result<DensityModel> {
    let m = vectors.rows();
    if m == 0 {
        return Err(Error::Empty("KDE training points"));
    }
    if m == 1 {
        return Err(Error::SingleTrainingPoint);
    }
    let d = vectors.cols();
    let cov = vectors.covariance();
    let factor = (m as f64).powf(-1.0 / (d as f64 + 4.0));
    let bandwidths = (0..d)
        .map(|j| {
            let sigma = cov[(j, j)].max(0.0).sqrt();
            (sigma * factor).max(1e-6 * (1.0 + sigma))
        })
        .collect();
    DensityModel::with_bandwidths(vectors.clone(), bandwidths)
}

/// `ln` of the mean product-Gaussian kernel at `x`, clamped below at the model's floor.
pub fn kde_logpdf(model: &DensityModel, x: &[f64]) -> Result<f64> {
    let d = model.bandwidths.len();
    if x.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: x.len() });
    }
    let inv_h: Vec<f64> = model.bandwidths.iter().map(|h| 1.0 / h).collect();
    let norm: f64 = model.bandwidths.iter().map(|h| h.ln() + LN_SQRT_2PI).sum();

    // streaming log-sum-exp
    let mut max = f64::NEG_INFINITY;
    let mut sum = 0.0;
    for t in model.training_points.row_iter() {
        let mut q = 0.0;
        for k in 0..d {
            let z = (x[k] - t[k]) * inv_h[k];
            q += z * z;
        }
        let v = -0.5 * q;
        if v > max {
            sum = sum * (max - v).exp() + 1.0;
            max = v;
        } else {
            sum += (v - max).exp();
        }
    }
    let ln = max + sum.ln() - norm - (model.len() as f64).ln();
    Ok(if ln.is_nan() || ln < model.log_floor { model.log_floor } else { ln })
}

impl Density for DensityModel {
    fn dim(&self) -> usize {
        self.bandwidths.len()
    }

    fn ln_pdf(&self, x: &[f64]) -> Result<f64> {
        kde_logpdf(self, x)
    }
}

impl SampleDensity for DensityModel {
    fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<f64>) {
        let row = rng.random_range(0..self.len());
        for (t, h) in self.training_points.row(row).iter().zip(&self.bandwidths) {
            let z: f64 = StandardNormal.sample(rng);
            out.push(t + h * z);
        }
    }
}
