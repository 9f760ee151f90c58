//! Weighted correlation clustering on the log-odds graph.

mod lp;
mod oracle;
mod pivot;
mod rounding;
pub mod simplex;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use serde::{Deserialize, Serialize};

pub use lp::{lp_relax, max_triangle_violation, FractionalMetric, CUTS_PER_ROUND, CUT_TOLERANCE};
pub use oracle::{brute_force_optimum, ORACLE_MAX_NODES};
pub use pivot::kwik_cluster;
pub use rounding::{c1, round_regions};

use crate::density::{Sign, SignedWeightedGraph};
use crate::{Error, Partition, Result};

/// Total cost of kept edges that `p` contradicts: positive edges across
/// clusters and negative edges inside one.
pub fn disagreement_cost(g: &SignedWeightedGraph, p: &Partition) -> Result<f64> {
    if p.len() != g.n() {
        return Err(Error::LengthMismatch { left: p.len(), right: g.n() });
    }
    Ok(g.edges().iter().filter(|e| p.same(e.pair.i, e.pair.j) != (e.sign == Sign::Plus)).map(|e| e.cost).sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveCertificate {
    pub lp_lower_bound: f64,
    pub rounded_cost: f64,
    pub c1: f64,
    /// `c1 * ln(n+1) * lp_lower_bound`.
    pub bound_rhs: f64,
    pub n: usize,
}

impl SolveCertificate {
    pub fn new(n: usize, lp_lower_bound: f64, rounded_cost: f64) -> Self {
        let c1 = c1(n);
        let bound_rhs = c1 * ((n as f64) + 1.0).ln() * lp_lower_bound;
        Self { lp_lower_bound, rounded_cost, c1, bound_rhs, n }
    }
}

/// LP relaxation followed by region growing. The metric is `None` when the
/// graph has no kept edges, in which case every node is a singleton.
pub fn solve_with_metric(g: &SignedWeightedGraph) -> Result<(Partition, SolveCertificate, Option<FractionalMetric>)> {
    if g.n() == 0 {
        return Err(Error::Empty("graph"));
    }
    if g.edges().is_empty() {
        return Ok((Partition::singletons(g.n()), SolveCertificate::new(g.n(), 0.0, 0.0), None));
    }
    let metric = lp_relax(g)?;
    let p = round_regions(&metric, g)?;
    let cost = disagreement_cost(g, &p)?;
    Ok((p, SolveCertificate::new(g.n(), metric.objective, cost), Some(metric)))
}

pub fn solve(g: &SignedWeightedGraph) -> Result<(Partition, SolveCertificate)> {
    solve_with_metric(g).map(|(p, c, _)| (p, c))
}
