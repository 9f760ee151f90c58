//! Edge-feature densities `P1` (same cluster) and `P0` (different clusters),
//! their log-odds, and the signed graph those log-odds induce.

mod kde;
mod parametric;
mod signed_graph;

pub use kde::{kde_fit, kde_logpdf, DensityModel, LOG_DENSITY_FLOOR};
pub use parametric::EdgeDensity;
pub use signed_graph::{build_signed_graph, signed_graph_from_log_odds, Sign, SignedEdge, SignedWeightedGraph};

use alloc::vec::Vec;

use rand::Rng;

use crate::Result;

/// Bound on the magnitude of a log-odds ratio, and so on any edge cost.
pub const LOG_ODDS_CLAMP: f64 = 50.0;

/// A density over edge feature vectors, evaluated in log space.
pub trait Density {
    fn dim(&self) -> usize;

    /// Natural log of the density at `x`. May be `-inf` outside a bounded support.
    fn ln_pdf(&self, x: &[f64]) -> Result<f64>;
}

/// A density that can also be sampled.
pub trait SampleDensity: Density {
    fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<f64>);

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim());
        self.sample_into(rng, &mut out);
        out
    }
}

/// Clamped `ln P1(e) - ln P0(e)`, given the two log-densities.
pub fn clamped_log_ratio(ln_p1: f64, ln_p0: f64) -> f64 {
    let r = ln_p1 - ln_p0;
    if r.is_nan() {
        // both -inf: no evidence either way
        0.0
    } else {
        r.clamp(-LOG_ODDS_CLAMP, LOG_ODDS_CLAMP)
    }
}

/// Sign and magnitude of the clamped log-odds `ln(P1(e) / P0(e))`.
///
/// The sign is 0 exactly when the two densities agree.
pub fn log_odds<P1: Density + ?Sized, P0: Density + ?Sized>(p1: &P1, p0: &P0, e: &[f64]) -> Result<(i8, f64)> {
    let r = clamped_log_ratio(p1.ln_pdf(e)?, p0.ln_pdf(e)?);
    Ok(sign_and_cost(r))
}

pub(crate) fn sign_and_cost(r: f64) -> (i8, f64) {
    let sign = if r > 0.0 {
        1
    } else if r < 0.0 {
        -1
    } else {
        0
    };
    (sign, r.abs())
}
