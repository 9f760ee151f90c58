use alloc::format;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{Density, SampleDensity};
use crate::{Error, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Closed-form edge densities used by the edge-level generator and as
/// analytic `P1`/`P0` in the expected-disagreement computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EdgeDensity {
    /// Independent Gaussians per coordinate.
    Gaussian {
        mean: Vec<f64>,
        std: Vec<f64>,
    },
    /// Uniform on the box `[low, high)`.
    Uniform {
        low: Vec<f64>,
        high: Vec<f64>,
    },
    Mixture {
        weights: Vec<f64>,
        components: Vec<EdgeDensity>,
    },
}

impl EdgeDensity {
    pub fn gaussian(mean: Vec<f64>, std: Vec<f64>) -> Result<Self> {
        let d = EdgeDensity::Gaussian { mean, std };
        d.validate()?;
        Ok(d)
    }

    pub fn uniform(low: Vec<f64>, high: Vec<f64>) -> Result<Self> {
        let d = EdgeDensity::Uniform { low, high };
        d.validate()?;
        Ok(d)
    }

    pub fn mixture(weights: Vec<f64>, components: Vec<EdgeDensity>) -> Result<Self> {
        let d = EdgeDensity::Mixture { weights, components };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(format!("edge density: {msg}")));
        match self {
            EdgeDensity::Gaussian { mean, std } => {
                if mean.is_empty() || mean.len() != std.len() {
                    return bad("mean and std must be nonempty and equally long");
                }
                if !mean.iter().all(|m| m.is_finite()) || !std.iter().all(|s| s.is_finite() && *s > 0.0) {
                    return bad("std must be positive and all parameters finite");
                }
            }
            EdgeDensity::Uniform { low, high } => {
                if low.is_empty() || low.len() != high.len() {
                    return bad("low and high must be nonempty and equally long");
                }
                if !low.iter().zip(high).all(|(l, h)| l.is_finite() && h.is_finite() && l < h) {
                    return bad("need finite low < high in every coordinate");
                }
            }
            EdgeDensity::Mixture { weights, components } => {
                if components.is_empty() || weights.len() != components.len() {
                    return bad("one weight per component required");
                }
                if !weights.iter().all(|w| w.is_finite() && *w > 0.0) {
                    return bad("mixture weights must be positive");
                }
                let d = components[0].dim();
                for c in components {
                    c.validate()?;
                    if c.dim() != d {
                        return bad("mixture components differ in dimension");
                    }
                }
            }
        }
        Ok(())
    }
}

impl Density for EdgeDensity {
    fn dim(&self) -> usize {
        match self {
            EdgeDensity::Gaussian { mean, .. } => mean.len(),
            EdgeDensity::Uniform { low, .. } => low.len(),
            EdgeDensity::Mixture { components, .. } => components.first().map_or(0, |c| c.dim()),
        }
    }

    fn ln_pdf(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: x.len() });
        }
        Ok(match self {
            EdgeDensity::Gaussian { mean, std } => x
                .iter()
                .zip(mean.iter().zip(std))
                .map(|(v, (m, s))| {
                    let z = (v - m) / s;
                    -0.5 * z * z - s.ln() - LN_SQRT_2PI
                })
                .sum(),
            EdgeDensity::Uniform { low, high } => {
                if x.iter().zip(low.iter().zip(high)).all(|(v, (l, h))| v >= l && v < h) {
                    -low.iter().zip(high).map(|(l, h)| (h - l).ln()).sum::<f64>()
                } else {
                    f64::NEG_INFINITY
                }
            }
            EdgeDensity::Mixture { weights, components } => {
                let total: f64 = weights.iter().sum();
                let mut terms = Vec::with_capacity(components.len());
                for (w, c) in weights.iter().zip(components) {
                    terms.push((w / total).ln() + c.ln_pdf(x)?);
                }
                let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if max == f64::NEG_INFINITY {
                    f64::NEG_INFINITY
                } else {
                    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
                }
            }
        })
    }
}

impl SampleDensity for EdgeDensity {
    fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<f64>) {
        match self {
            EdgeDensity::Gaussian { mean, std } => {
                for (m, s) in mean.iter().zip(std) {
                    let z: f64 = StandardNormal.sample(rng);
                    out.push(m + s * z);
                }
            }
            EdgeDensity::Uniform { low, high } => {
                for (l, h) in low.iter().zip(high) {
                    out.push(rng.random_range(*l..*h));
                }
            }
            EdgeDensity::Mixture { weights, components } => {
                let total: f64 = weights.iter().sum();
                let mut u = rng.random::<f64>() * total;
                let mut pick = components.len() - 1;
                for (idx, w) in weights.iter().enumerate() {
                    if u < *w {
                        pick = idx;
                        break;
                    }
                    u -= w;
                }
                components[pick].sample_into(rng, out);
            }
        }
    }
}
