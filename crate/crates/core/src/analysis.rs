//! Likelihood of a partition under fitted edge densities, and the expected
//! disagreement between the log-odds graph and the planted partition.

use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corrclust::{c1, disagreement_cost};
use crate::density::{clamped_log_ratio, Density, SampleDensity, SignedWeightedGraph};
use crate::edge_features::EdgeFeatureSet;
use crate::partition::pair_count;
use crate::{Error, PairIndex, Partition, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LikelihoodReport {
    pub log_likelihood_theta: f64,
    pub log_likelihood_g0: f64,
    pub disagreement_term: f64,
}

/// Log-likelihood of `p` given every pair's edge features.
///
/// The disagreement term uses the unclamped `|ln P1 - ln P0|`, so the
/// decomposition `theta = g0 - disagreement` is exact even where graph costs
/// are clamped.
pub fn log_likelihood<P1: Density + ?Sized, P0: Density + ?Sized>(
    p: &Partition,
    features: &EdgeFeatureSet,
    p1: &P1,
    p0: &P0,
) -> Result<LikelihoodReport> {
    let n = p.len();
    if features.node_bound() > n {
        return Err(Error::IndexOutOfRange { index: features.node_bound() - 1, n });
    }
    if features.len() != pair_count(n) {
        let missing = crate::partition::all_pairs(n)
            .find(|e| features.position(*e).is_none())
            .expect("fewer features than pairs");
        return Err(Error::MissingPair(missing.i, missing.j));
    }
    let mut ln_p1 = Vec::with_capacity(features.len());
    let mut ln_p0 = Vec::with_capacity(features.len());
    for (_, v) in features.iter() {
        ln_p1.push(p1.ln_pdf(v)?);
        ln_p0.push(p0.ln_pdf(v)?);
    }
    likelihood_from_log_densities(p, features.pairs(), &ln_p1, &ln_p0)
}

/// [`log_likelihood`] from precomputed `ln P1(e)` and `ln P0(e)` per pair.
/// The pairs are trusted to cover every pair of `p` exactly once.
pub fn likelihood_from_log_densities(
    p: &Partition,
    pairs: &[PairIndex],
    ln_p1: &[f64],
    ln_p0: &[f64],
) -> Result<LikelihoodReport> {
    if pairs.len() != ln_p1.len() || pairs.len() != ln_p0.len() {
        return Err(Error::LengthMismatch { left: pairs.len(), right: ln_p1.len().min(ln_p0.len()) });
    }
    let mut theta = 0.0;
    let mut g0 = 0.0;
    let mut dis = 0.0;
    for ((e, &l1), &l0) in pairs.iter().zip(ln_p1).zip(ln_p0) {
        if e.j >= p.len() {
            return Err(Error::IndexOutOfRange { index: e.j, n: p.len() });
        }
        let same = p.same(e.i, e.j);
        theta += if same { l1 } else { l0 };
        g0 += l1.max(l0);
        if (same && l1 < l0) || (!same && l1 > l0) {
            dis += (l1 - l0).abs();
        }
    }
    Ok(LikelihoodReport { log_likelihood_theta: theta, log_likelihood_g0: g0, disagreement_term: dis })
}

/// `ln L(G0) - c1 ln(n+1) DIS`, the floor the rounded partition's
/// log-likelihood must clear given the optimal disagreement `dis_opt`.
pub fn likelihood_floor(log_likelihood_g0: f64, dis_opt: f64, n: usize) -> f64 {
    log_likelihood_g0 - c1(n) * ((n as f64) + 1.0).ln() * dis_opt
}

/// Disagreement of the log-odds graph with the true partition.
pub fn empirical_dis(g: &SignedWeightedGraph, truth: &Partition) -> Result<f64> {
    disagreement_cost(g, truth)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectedDisReport {
    pub n0: usize,
    pub n1: usize,
    pub estimate: f64,
    pub std_error: f64,
    pub sample_count: usize,
}

/// Minimum Monte Carlo draws per density accepted by [`expected_dis`].
pub const MIN_EXPECTED_DIS_SAMPLES: usize = 1000;

/// Monte Carlo estimate of the expected disagreement between the log-odds
/// graph and the planted partition:
/// `n1 E_P1[ln(P0/P1) 1{P1 <= P0}] + n0 E_P0[ln(P1/P0) 1{P0 <= P1}]`,
/// with log-ratios clamped as in the graph. `samples` draws are taken from each density.
pub fn expected_dis<P1, P0, R>(
    p1: &P1,
    p0: &P0,
    n1: usize,
    n0: usize,
    samples: usize,
    rng: &mut R,
) -> Result<ExpectedDisReport>
where
    P1: SampleDensity + ?Sized,
    P0: SampleDensity + ?Sized,
    R: Rng + ?Sized,
{
    if samples < MIN_EXPECTED_DIS_SAMPLES {
        return Err(Error::InvalidParameter(alloc::format!(
            "expected_dis needs at least {MIN_EXPECTED_DIS_SAMPLES} samples, got {samples}"
        )));
    }
    if p1.dim() != p0.dim() {
        return Err(Error::DimensionMismatch { expected: p1.dim(), found: p0.dim() });
    }
    let mut buf = Vec::with_capacity(p1.dim());
    // (mean, variance) of the per-draw term under each density
    let mut side = |from_p1: bool, rng: &mut R| -> Result<(f64, f64)> {
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..samples {
            buf.clear();
            if from_p1 {
                p1.sample_into(rng, &mut buf);
            } else {
                p0.sample_into(rng, &mut buf);
            }
            let r = clamped_log_ratio(p1.ln_pdf(&buf)?, p0.ln_pdf(&buf)?);
            let term = if from_p1 { (-r).max(0.0) } else { r.max(0.0) };
            if !term.is_finite() {
                return Err(Error::NonFinite("expected disagreement term"));
            }
            sum += term;
            sum_sq += term * term;
        }
        let s = samples as f64;
        let mean = sum / s;
        let var = ((sum_sq - s * mean * mean) / (s - 1.0)).max(0.0);
        Ok((mean, var))
    };
    let (m1, v1) = side(true, rng)?;
    let (m0, v0) = side(false, rng)?;
    let (f1, f0, s) = (n1 as f64, n0 as f64, samples as f64);
    Ok(ExpectedDisReport {
        n0,
        n1,
        estimate: f1 * m1 + f0 * m0,
        std_error: (f1 * f1 * v1 / s + f0 * f0 * v0 / s).sqrt(),
        sample_count: samples,
    })
}
