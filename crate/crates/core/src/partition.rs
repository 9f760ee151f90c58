//! Node sets, node pairs and hard partitions.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{Error, Matrix, Result};

/// Node features with optional ground-truth cluster labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    features: Matrix,
    labels: Option<Partition>,
}

impl SampleSet {
    pub fn new(features: Matrix, labels: Option<Vec<usize>>) -> Result<Self> {
        if features.rows() == 0 {
            return Err(Error::Empty("sample set"));
        }
        if !features.is_finite() {
            return Err(Error::NonFinite("node features"));
        }
        let labels = match labels {
            Some(l) => {
                if l.len() != features.rows() {
                    return Err(Error::LengthMismatch { left: features.rows(), right: l.len() });
                }
                Some(validate_partition(&l)?)
            }
            None => None,
        };
        Ok(Self { features, labels })
    }

    pub fn len(&self) -> usize {
        self.features.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.features.rows() == 0
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn point(&self, i: usize) -> &[f64] {
        self.features.row(i)
    }

    pub fn labels(&self) -> Option<&Partition> {
        self.labels.as_ref()
    }

    /// Keeps the listed rows, in the given order.
    pub fn subset(&self, rows: &[usize]) -> Result<SampleSet> {
        let mut features = Matrix::zeros(0, 0);
        for &r in rows {
            if r >= self.len() {
                return Err(Error::IndexOutOfRange { index: r, n: self.len() });
            }
            features.push_row(self.point(r))?;
        }
        if features.cols() == 0 && self.dim() > 0 {
            features = Matrix::zeros(0, self.dim());
        }
        let labels = self.labels.as_ref().map(|p| rows.iter().map(|&r| p.label(r)).collect());
        SampleSet::new(features, labels)
    }
}

/// An unordered node pair, stored with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PairIndex {
    pub i: usize,
    pub j: usize,
}

impl PairIndex {
    /// Orders the endpoints; a self-pair is rejected.
    pub fn new(a: usize, b: usize) -> Result<Self> {
        match a.cmp(&b) {
            core::cmp::Ordering::Less => Ok(Self { i: a, j: b }),
            core::cmp::Ordering::Greater => Ok(Self { i: b, j: a }),
            core::cmp::Ordering::Equal => Err(Error::SelfPair(a)),
        }
    }

    /// Position of this pair in the row-major enumeration of all pairs of `n` nodes.
    #[inline]
    pub fn linear_index(self, n: usize) -> usize {
        self.i * (2 * n - self.i - 1) / 2 + (self.j - self.i - 1)
    }
}

/// Number of unordered pairs of `n` nodes.
#[inline]
pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// All pairs `(i, j)` with `i < j < n`, in row-major order.
pub fn all_pairs(n: usize) -> impl Iterator<Item = PairIndex> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| PairIndex { i, j }))
}

/// A hard clustering whose labels are a surjection onto `1..=k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Partition {
    labels: Vec<usize>,
    k: usize,
}

impl Partition {
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    #[inline]
    pub fn label(&self, node: usize) -> usize {
        self.labels[node]
    }

    /// Cluster sizes indexed by `label - 1`.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.labels {
            sizes[l - 1] += 1;
        }
        sizes
    }

    /// Members of each cluster, indexed by `label - 1`.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (node, &l) in self.labels.iter().enumerate() {
            out[l - 1].push(node);
        }
        out
    }

    /// Numbers of intra-cluster and inter-cluster pairs, `(n1, n0)`.
    pub fn pair_counts(&self) -> (usize, usize) {
        let n1: usize = self.sizes().iter().map(|&s| pair_count(s)).sum();
        (n1, pair_count(self.len()) - n1)
    }

    #[inline]
    pub(crate) fn same(&self, i: usize, j: usize) -> bool {
        self.labels[i] == self.labels[j]
    }

    pub fn single_cluster(n: usize) -> Self {
        Self { labels: vec![1; n], k: usize::from(n > 0) }
    }

    pub fn singletons(n: usize) -> Self {
        Self { labels: (1..=n).collect(), k: n }
    }
}

impl TryFrom<Vec<usize>> for Partition {
    type Error = Error;

    fn try_from(labels: Vec<usize>) -> Result<Self> {
        validate_partition(&labels)
    }
}

impl From<Partition> for Vec<usize> {
    fn from(p: Partition) -> Vec<usize> {
        p.labels
    }
}

/// Relabels arbitrary integer labels to `1..=k` in order of first appearance.
pub fn validate_partition(labels: &[usize]) -> Result<Partition> {
    if labels.is_empty() {
        return Err(Error::Empty("partition labels"));
    }
    let mut seen: alloc::collections::BTreeMap<usize, usize> = Default::default();
    let mut out = Vec::with_capacity(labels.len());
    for &l in labels {
        let next = seen.len() + 1;
        out.push(*seen.entry(l).or_insert(next));
    }
    Ok(Partition { labels: out, k: seen.len() })
}

/// 1 when both endpoints of `e` share a cluster, else 0.
pub fn same_cluster(p: &Partition, e: PairIndex) -> Result<u8> {
    if e.i >= e.j {
        return Err(Error::SelfPair(e.i));
    }
    if e.j >= p.len() {
        return Err(Error::IndexOutOfRange { index: e.j, n: p.len() });
    }
    Ok(u8::from(p.same(e.i, e.j)))
}
