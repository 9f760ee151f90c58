//! Synthetic node datasets and the edge-level planted partition generator.

use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::density::{Density, EdgeDensity, SampleDensity};
use crate::edge_features::EdgeFeatureSet;
use crate::partition::all_pairs;
use crate::{validate_partition, Error, Matrix, Partition, Result, SampleSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SyntheticKind {
    /// Two line segments crossing at their midpoints.
    Crossbones,
    /// Short segments on a lattice with alternating orientation.
    Grid,
    /// Isotropic Gaussian blobs on a circle.
    Blobs,
    /// Concentric rings.
    Circles,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub kind: SyntheticKind,
    pub n: usize,
    pub k: usize,
    /// Gaussian noise std, in units of `segment_length` for the segment
    /// kinds and absolute for blobs and circles.
    pub noise: f64,
    pub segment_length: f64,
    /// Crossing angle of the second crossbones segment, degrees.
    pub angle_deg: f64,
    /// Gap between neighboring grid segments.
    pub spacing: f64,
}

impl SyntheticSpec {
    pub fn crossbones(n: usize) -> Self {
        Self {
            kind: SyntheticKind::Crossbones,
            n,
            k: 2,
            noise: 0.03,
            segment_length: 1.0,
            angle_deg: 75.0,
            spacing: 0.5,
        }
    }

    pub fn grid(n: usize, k: usize) -> Self {
        Self { kind: SyntheticKind::Grid, n, k, noise: 0.03, segment_length: 1.0, angle_deg: 90.0, spacing: 0.5 }
    }

    pub fn blobs(n: usize, k: usize) -> Self {
        Self { kind: SyntheticKind::Blobs, n, k, noise: 0.3, segment_length: 1.0, angle_deg: 0.0, spacing: 3.0 }
    }

    pub fn circles(n: usize) -> Self {
        Self { kind: SyntheticKind::Circles, n, k: 2, noise: 0.05, segment_length: 1.0, angle_deg: 0.0, spacing: 2.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(alloc::format!("synthetic spec: {m}")));
        if self.k == 0 || self.n < self.k {
            return bad("need n >= k >= 1");
        }
        if !(self.noise.is_finite() && self.noise >= 0.0) {
            return bad("noise must be finite and >= 0");
        }
        if !(self.segment_length.is_finite() && self.segment_length > 0.0) {
            return bad("segment_length must be positive");
        }
        if !(self.spacing.is_finite() && self.spacing >= 0.0) || !self.angle_deg.is_finite() {
            return bad("spacing and angle must be finite, spacing >= 0");
        }
        if self.kind == SyntheticKind::Crossbones && self.k != 2 {
            return bad("crossbones has exactly 2 clusters");
        }
        Ok(())
    }

    /// Cluster sizes: `n / k` each, the remainder spread over the first clusters.
    pub fn sizes(&self) -> Vec<usize> {
        balanced_sizes(self.n, self.k)
    }
}

pub fn balanced_sizes(n: usize, k: usize) -> Vec<usize> {
    (0..k).map(|c| n / k + usize::from(c < n % k)).collect()
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Draws a labeled 2-D dataset. Points are emitted cluster by cluster.
pub fn gen_synthetic<R: Rng + ?Sized>(spec: &SyntheticSpec, rng: &mut R) -> Result<SampleSet> {
    spec.validate()?;
    let len = spec.segment_length;
    let mut rows: Vec<[f64; 2]> = Vec::with_capacity(spec.n);
    let mut labels = Vec::with_capacity(spec.n);
    let cols = (spec.k as f64).sqrt().ceil() as usize;
    for (c, &size) in spec.sizes().iter().enumerate() {
        for _ in 0..size {
            let p = match spec.kind {
                SyntheticKind::Crossbones | SyntheticKind::Grid => {
                    let (center, angle) = if spec.kind == SyntheticKind::Crossbones {
                        ([0.0, 0.0], if c == 0 { 0.0 } else { spec.angle_deg.to_radians() })
                    } else {
                        // neighbors' facing ends are `spacing` apart
                        let pitch = 0.5 * len + spec.spacing;
                        let (r, q) = (c / cols, c % cols);
                        let a = if (r + q) % 2 == 0 { 0.0 } else { spec.angle_deg.to_radians() };
                        ([q as f64 * pitch, r as f64 * pitch], a)
                    };
                    let t = rng.random_range(-0.5..=0.5) * len;
                    let s = spec.noise * len;
                    [center[0] + t * angle.cos() + s * normal(rng), center[1] + t * angle.sin() + s * normal(rng)]
                }
                SyntheticKind::Blobs => {
                    let a = core::f64::consts::TAU * c as f64 / spec.k as f64;
                    let radius = if spec.k == 1 { 0.0 } else { spec.spacing };
                    [radius * a.cos() + spec.noise * normal(rng), radius * a.sin() + spec.noise * normal(rng)]
                }
                SyntheticKind::Circles => {
                    let radius = 1.0 + spec.spacing * c as f64;
                    let a = rng.random_range(0.0..core::f64::consts::TAU);
                    [radius * a.cos() + spec.noise * normal(rng), radius * a.sin() + spec.noise * normal(rng)]
                }
            };
            rows.push(p);
            labels.push(c + 1);
        }
    }
    SampleSet::new(Matrix::from_rows(&rows)?, Some(labels))
}

/// Planted partition over pairs: each pair's edge vector is drawn from `p1`
/// when both endpoints share a cluster and from `p0` otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeLevelSpec {
    pub sizes: Vec<usize>,
    pub p1: EdgeDensity,
    pub p0: EdgeDensity,
}

impl EdgeLevelSpec {
    pub fn balanced(n: usize, k: usize, p1: EdgeDensity, p0: EdgeDensity) -> Result<Self> {
        if k == 0 || n < k {
            return Err(Error::InvalidParameter(alloc::format!("edge-level spec needs n >= k >= 1, got n={n}, k={k}")));
        }
        let s = Self { sizes: balanced_sizes(n, k), p1, p0 };
        s.validate()?;
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn k(&self) -> usize {
        self.sizes.len()
    }

    pub fn truth(&self) -> Result<Partition> {
        let labels: Vec<usize> = self.sizes.iter().enumerate().flat_map(|(c, &s)| vec![c + 1; s]).collect();
        validate_partition(&labels)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() || self.sizes.contains(&0) {
            return Err(Error::InvalidParameter("edge-level cluster sizes must be positive".into()));
        }
        self.p1.validate()?;
        self.p0.validate()?;
        if self.p1.dim() != self.p0.dim() {
            return Err(Error::DimensionMismatch { expected: self.p1.dim(), found: self.p0.dim() });
        }
        Ok(())
    }
}

pub fn gen_edge_level<R: Rng + ?Sized>(spec: &EdgeLevelSpec, rng: &mut R) -> Result<(EdgeFeatureSet, Partition)> {
    spec.validate()?;
    let truth = spec.truth()?;
    let n = spec.n();
    let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
    let mut data = Vec::with_capacity(pairs.capacity() * spec.p1.dim());
    for e in all_pairs(n) {
        let d = if truth.label(e.i) == truth.label(e.j) { &spec.p1 } else { &spec.p0 };
        d.sample_into(rng, &mut data);
        pairs.push(e);
    }
    let rows = pairs.len();
    let vectors = Matrix::from_vec(rows, spec.p1.dim(), data)?;
    Ok((EdgeFeatureSet::new(pairs, vectors)?, truth))
}
