use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{clamped_log_ratio, sign_and_cost, Density};
use crate::edge_features::EdgeFeatureSet;
use crate::{Error, PairIndex, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    /// The pair is more likely intra-cluster.
    Plus,
    /// The pair is more likely inter-cluster.
    Minus,
}

impl Sign {
    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn from_i8(s: i8) -> Option<Sign> {
        match s {
            1 => Some(Sign::Plus),
            -1 => Some(Sign::Minus),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignedEdge {
    pub pair: PairIndex,
    pub sign: Sign,
    pub cost: f64,
}

/// The log-odds graph: kept edges carry a sign and a nonnegative mislabeling
/// cost, sparsified pairs are listed separately and cost nothing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignedWeightedGraph {
    n: usize,
    edges: Vec<SignedEdge>,
    dropped: Vec<PairIndex>,
}

impl SignedWeightedGraph {
    pub fn new(n: usize, edges: Vec<SignedEdge>, dropped: Vec<PairIndex>) -> Result<Self> {
        let mut seen: Vec<PairIndex> = Vec::with_capacity(edges.len() + dropped.len());
        for e in &edges {
            if !(e.cost.is_finite() && e.cost >= 0.0) {
                return Err(Error::InvalidParameter(alloc::format!(
                    "edge ({}, {}) has invalid cost {}",
                    e.pair.i,
                    e.pair.j,
                    e.cost
                )));
            }
            seen.push(e.pair);
        }
        seen.extend_from_slice(&dropped);
        for p in &seen {
            if p.i >= p.j {
                return Err(Error::SelfPair(p.i));
            }
            if p.j >= n {
                return Err(Error::IndexOutOfRange { index: p.j, n });
            }
        }
        seen.sort_unstable();
        if let Some(w) = seen.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicatePair(w[0].i, w[0].j));
        }
        Ok(Self { n, edges, dropped })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[SignedEdge] {
        &self.edges
    }

    pub fn dropped(&self) -> &[PairIndex] {
        &self.dropped
    }

    /// Every cost multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::InvalidParameter(alloc::format!("scale factor {factor} must be positive")));
        }
        let edges = self.edges.iter().map(|e| SignedEdge { cost: e.cost * factor, ..*e }).collect();
        Ok(Self { n: self.n, edges, dropped: self.dropped.clone() })
    }

    /// Nodes touched by at least one kept edge, ascending.
    pub fn active_nodes(&self) -> Vec<usize> {
        let mut touched = alloc::vec![false; self.n];
        for e in &self.edges {
            touched[e.pair.i] = true;
            touched[e.pair.j] = true;
        }
        (0..self.n).filter(|&v| touched[v]).collect()
    }
}

/// Assembles the signed graph from precomputed clamped log-odds, one per pair.
/// Pairs whose cost is at most `sparsify_below` are dropped; zero-cost pairs always are.
pub fn signed_graph_from_log_odds(
    n: usize,
    pairs: &[PairIndex],
    log_odds: &[f64],
    sparsify_below: f64,
) -> Result<SignedWeightedGraph> {
    if pairs.len() != log_odds.len() {
        return Err(Error::LengthMismatch { left: pairs.len(), right: log_odds.len() });
    }
    if sparsify_below.is_nan() || sparsify_below < 0.0 {
        return Err(Error::InvalidParameter(alloc::format!("sparsify threshold {sparsify_below} must be >= 0")));
    }
    let mut edges = Vec::new();
    let mut dropped = Vec::new();
    for (&pair, &r) in pairs.iter().zip(log_odds) {
        let (sign, cost) = sign_and_cost(r);
        match Sign::from_i8(sign) {
            Some(sign) if cost > sparsify_below => edges.push(SignedEdge { pair, sign, cost }),
            _ => dropped.push(pair),
        }
    }
    SignedWeightedGraph::new(n, edges, dropped)
}

/// The graph `G0` whose edges carry the sign and magnitude of `ln(P1/P0)`.
/// The node count is one more than the largest endpoint in `features`.
pub fn build_signed_graph<P1: Density + ?Sized, P0: Density + ?Sized>(
    features: &EdgeFeatureSet,
    p1: &P1,
    p0: &P0,
    sparsify_below: f64,
) -> Result<SignedWeightedGraph> {
    let mut ratios = Vec::with_capacity(features.len());
    for (_, e) in features.iter() {
        ratios.push(clamped_log_ratio(p1.ln_pdf(e)?, p0.ln_pdf(e)?));
    }
    signed_graph_from_log_odds(features.node_bound(), features.pairs(), &ratios, sparsify_below)
}
