//! Edge feature vectors built from node features, labeled training pairs,
//! and PCA reduction of edge features.

use alloc::format;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::symmetric_eigen;
use crate::partition::{all_pairs, pair_count};
use crate::{Error, Matrix, PairIndex, Partition, Result, SampleSet};

/// Symmetric similarity function turning two node vectors into an edge vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Similarity {
    /// Elementwise `|u - v|`; keeps one dimension per node feature.
    #[default]
    #[serde(rename = "absdiff")]
    AbsDiff,
    /// The scalar L2 distance `||u - v||`.
    #[serde(rename = "euclid")]
    Euclidean,
}

impl Similarity {
    pub fn output_dim(self, node_dim: usize) -> usize {
        match self {
            Similarity::AbsDiff => node_dim,
            Similarity::Euclidean => 1,
        }
    }
}

/// Applies `kind` to the node vectors `u` and `v`, appending the result to `out`.
pub fn similarity_into(u: &[f64], v: &[f64], kind: Similarity, out: &mut Vec<f64>) -> Result<()> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch { expected: u.len(), found: v.len() });
    }
    if !u.iter().chain(v).all(|x| x.is_finite()) {
        return Err(Error::NonFinite("similarity input"));
    }
    match kind {
        Similarity::AbsDiff => out.extend(u.iter().zip(v).map(|(a, b)| (a - b).abs())),
        Similarity::Euclidean => {
            let sq: f64 = u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum();
            out.push(sq.sqrt());
        }
    }
    Ok(())
}

pub fn similarity(u: &[f64], v: &[f64], kind: Similarity) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(kind.output_dim(u.len()));
    similarity_into(u, v, kind, &mut out)?;
    Ok(out)
}

/// Edge vectors for a set of distinct node pairs; row `r` belongs to `pairs[r]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeFeatureSet {
    pairs: Vec<PairIndex>,
    vectors: Matrix,
    #[serde(skip)]
    lookup: Vec<(PairIndex, usize)>,
}

impl EdgeFeatureSet {
    pub fn new(pairs: Vec<PairIndex>, vectors: Matrix) -> Result<Self> {
        if pairs.len() != vectors.rows() {
            return Err(Error::LengthMismatch { left: pairs.len(), right: vectors.rows() });
        }
        if vectors.cols() == 0 && !pairs.is_empty() {
            return Err(Error::InvalidParameter("edge feature dimension must be at least 1".into()));
        }
        if !vectors.is_finite() {
            return Err(Error::NonFinite("edge features"));
        }
        let mut lookup: Vec<(PairIndex, usize)> = pairs.iter().copied().zip(0..).collect();
        lookup.sort_unstable();
        if let Some(w) = lookup.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::DuplicatePair(w[0].0.i, w[0].0.j));
        }
        Ok(Self { pairs, vectors, lookup })
    }

    /// Edge vectors for the listed pairs of `samples`.
    pub fn from_samples(samples: &SampleSet, pairs: Vec<PairIndex>, kind: Similarity) -> Result<Self> {
        let d = kind.output_dim(samples.dim());
        let mut data = Vec::with_capacity(pairs.len() * d);
        for e in &pairs {
            for node in [e.i, e.j] {
                if node >= samples.len() {
                    return Err(Error::IndexOutOfRange { index: node, n: samples.len() });
                }
            }
            similarity_into(samples.point(e.i), samples.point(e.j), kind, &mut data)?;
        }
        let vectors = Matrix::from_vec(pairs.len(), d, data)?;
        Self::new(pairs, vectors)
    }

    /// Edge vectors for every pair of `samples`.
    pub fn complete(samples: &SampleSet, kind: Similarity) -> Result<Self> {
        Self::from_samples(samples, all_pairs(samples.len()).collect(), kind)
    }

    pub fn pairs(&self) -> &[PairIndex] {
        &self.pairs
    }

    pub fn vectors(&self) -> &Matrix {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.vectors.cols()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (PairIndex, &[f64])> + '_ {
        self.pairs.iter().copied().zip(self.vectors.row_iter())
    }

    /// Row holding the vector of `pair`, if present.
    pub fn position(&self, pair: PairIndex) -> Option<usize> {
        if self.lookup.len() != self.pairs.len() {
            // deserialized without the index
            return self.pairs.iter().position(|&p| p == pair);
        }
        self.lookup.binary_search_by(|(p, _)| p.cmp(&pair)).ok().map(|at| self.lookup[at].1)
    }

    pub fn get(&self, pair: PairIndex) -> Option<&[f64]> {
        self.position(pair).map(|r| self.vectors.row(r))
    }

    /// Same pairs with new vectors, e.g. after a PCA projection.
    pub fn map_vectors(&self, vectors: Matrix) -> Result<Self> {
        Self::new(self.pairs.clone(), vectors)
    }

    /// Largest node index referenced plus one.
    pub fn node_bound(&self) -> usize {
        self.pairs.iter().map(|p| p.j + 1).max().unwrap_or(0)
    }
}

/// Training edge vectors split by the ground-truth same-cluster indicator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledPairSet {
    pub same_vectors: Matrix,
    pub diff_vectors: Matrix,
}

impl LabeledPairSet {
    pub fn from_labeled(features: &EdgeFeatureSet, same: &[bool]) -> Result<Self> {
        if same.len() != features.len() {
            return Err(Error::LengthMismatch { left: features.len(), right: same.len() });
        }
        let d = features.dim();
        let mut same_vectors = Matrix::zeros(0, d);
        let mut diff_vectors = Matrix::zeros(0, d);
        for ((_, v), &s) in features.iter().zip(same) {
            if s {
                same_vectors.push_row(v)?;
            } else {
                diff_vectors.push_row(v)?;
            }
        }
        if same_vectors.rows() == 0 {
            return Err(Error::DegenerateLabels("no same-cluster training pair"));
        }
        if diff_vectors.rows() == 0 {
            return Err(Error::DegenerateLabels("no cross-cluster training pair"));
        }
        Ok(Self { same_vectors, diff_vectors })
    }
}

/// Pair at position `idx` of the row-major enumeration of all pairs of `n` nodes.
pub fn pair_at(idx: usize, n: usize) -> PairIndex {
    // offsets(i) = i * (2n - i - 1) / 2 is increasing in i
    let (mut lo, mut hi) = (0usize, n - 1);
    while lo + 1 < hi {
        let mid = (lo + hi) / 2;
        if mid * (2 * n - mid - 1) / 2 <= idx {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let i = lo;
    let offset = i * (2 * n - i - 1) / 2;
    PairIndex { i, j: i + 1 + (idx - offset) }
}

/// Draws `m` pairs uniformly without replacement (all pairs when `m >= C(n,2)`)
/// and labels each by the ground truth. Pairs are returned in row-major order.
pub fn sample_pair_labels<R: Rng + ?Sized>(truth: &Partition, m: usize, rng: &mut R) -> Result<Vec<(PairIndex, bool)>> {
    let n = truth.len();
    if m == 0 {
        return Err(Error::Empty("training pair count"));
    }
    if n < 2 {
        return Err(Error::DegenerateLabels("fewer than two labeled nodes"));
    }
    let sizes = truth.sizes();
    if sizes.iter().all(|&s| s < 2) {
        return Err(Error::DegenerateLabels("every node is in its own cluster"));
    }
    if truth.k() < 2 {
        return Err(Error::DegenerateLabels("all nodes share one cluster"));
    }
    let total = pair_count(n);
    let mut chosen: Vec<usize> =
        if m >= total { (0..total).collect() } else { rand::seq::index::sample(rng, total, m).into_vec() };
    chosen.sort_unstable();
    Ok(chosen
        .into_iter()
        .map(|idx| {
            let e = pair_at(idx, n);
            (e, truth.label(e.i) == truth.label(e.j))
        })
        .collect())
}

/// Samples labeled training pairs and splits their edge vectors by label.
pub fn sample_labeled_pairs<R: Rng + ?Sized>(
    samples: &SampleSet,
    m: usize,
    kind: Similarity,
    rng: &mut R,
) -> Result<LabeledPairSet> {
    let truth = samples.labels().ok_or(Error::MissingLabels)?;
    let labeled = sample_pair_labels(truth, m, rng)?;
    let (pairs, same): (Vec<_>, Vec<_>) = labeled.into_iter().unzip();
    let features = EdgeFeatureSet::from_samples(samples, pairs, kind)?;
    LabeledPairSet::from_labeled(&features, &same)
}

/// Principal axes retained to reach a target share of the variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// `d x r`, orthonormal columns.
    pub components: Matrix,
    /// Nonincreasing, length `r`.
    pub explained_variance: Vec<f64>,
    /// Set when every input row was identical; a single arbitrary axis is kept.
    pub zero_variance: bool,
}

pub const DEFAULT_PCA_VARIANCE: f64 = 0.95;

pub fn pca_fit(vectors: &Matrix, variance_target: f64) -> Result<PcaModel> {
    if !(variance_target > 0.0 && variance_target <= 1.0) {
        return Err(Error::InvalidParameter(format!("PCA variance target {variance_target} not in (0, 1]")));
    }
    if vectors.rows() < 2 {
        return Err(Error::InvalidParameter("PCA needs at least two rows".into()));
    }
    if !vectors.is_finite() {
        return Err(Error::NonFinite("PCA input"));
    }
    let d = vectors.cols();
    let eig = symmetric_eigen(&vectors.covariance())?;
    // descending
    let values: Vec<f64> = eig.values.iter().rev().map(|&v| v.max(0.0)).collect();
    let total: f64 = values.iter().sum();
    let (r, zero_variance) = if total <= 0.0 {
        (1, true)
    } else {
        let mut cum = 0.0;
        let mut r = d;
        for (idx, v) in values.iter().enumerate() {
            cum += v;
            if cum / total >= variance_target - 1e-12 {
                r = idx + 1;
                break;
            }
        }
        (r, false)
    };
    let mut components = Matrix::zeros(d, r);
    for c in 0..r {
        let src = d - 1 - c;
        for row in 0..d {
            components[(row, c)] = eig.vectors[(row, src)];
        }
    }
    Ok(PcaModel { mean: vectors.mean(), components, explained_variance: values[..r].to_vec(), zero_variance })
}

impl PcaModel {
    pub fn dim_in(&self) -> usize {
        self.components.rows()
    }

    pub fn dim_out(&self) -> usize {
        self.components.cols()
    }

    pub fn transform_one(&self, x: &[f64], out: &mut Vec<f64>) -> Result<()> {
        if x.len() != self.dim_in() {
            return Err(Error::DimensionMismatch { expected: self.dim_in(), found: x.len() });
        }
        for c in 0..self.dim_out() {
            out.push((0..x.len()).map(|k| (x[k] - self.mean[k]) * self.components[(k, c)]).sum());
        }
        Ok(())
    }

    pub fn inverse_transform(&self, projected: &Matrix) -> Result<Matrix> {
        let mut out = projected.matmul(&self.components.transpose())?;
        for i in 0..out.rows() {
            for (v, m) in out.row_mut(i).iter_mut().zip(&self.mean) {
                *v += m;
            }
        }
        Ok(out)
    }
}

/// Centers then projects every row onto the retained components.
pub fn pca_transform(model: &PcaModel, vectors: &Matrix) -> Result<Matrix> {
    let mut data = Vec::with_capacity(vectors.rows() * model.dim_out());
    for row in vectors.row_iter() {
        model.transform_one(row, &mut data)?;
    }
    Matrix::from_vec(vectors.rows(), model.dim_out(), data)
}
