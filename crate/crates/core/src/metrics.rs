//! Agreement between a predicted and a reference partition.

use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::partition::pair_count;
use crate::{Error, Partition, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub nmi: f64,
    pub pairwise_precision: f64,
    pub pairwise_recall: f64,
    pub pairwise_f1: f64,
    pub k_predicted: usize,
}

/// Contingency counts `table[a][b]` = nodes with predicted label `a+1` and true label `b+1`.
fn contingency(predicted: &Partition, truth: &Partition) -> Vec<Vec<usize>> {
    let mut table = vec![vec![0usize; truth.k()]; predicted.k()];
    for (&a, &b) in predicted.labels().iter().zip(truth.labels()) {
        table[a - 1][b - 1] += 1;
    }
    table
}

fn entropy(counts: impl Iterator<Item = usize>, n: f64) -> f64 {
    counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Normalized mutual information with the arithmetic-mean normalizer.
pub fn nmi(predicted: &Partition, truth: &Partition) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::LengthMismatch { left: predicted.len(), right: truth.len() });
    }
    let n = predicted.len() as f64;
    let table = contingency(predicted, truth);
    let row_sums: Vec<usize> = table.iter().map(|r| r.iter().sum()).collect();
    let col_sums: Vec<usize> = (0..truth.k()).map(|b| table.iter().map(|r| r[b]).sum()).collect();
    let h_pred = entropy(row_sums.iter().copied(), n);
    let h_true = entropy(col_sums.iter().copied(), n);
    if h_pred == 0.0 && h_true == 0.0 {
        return Ok(if predicted.k() == truth.k() { 1.0 } else { 0.0 });
    }
    let mut mi = 0.0;
    for (a, row) in table.iter().enumerate() {
        for (b, &c) in row.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let c = c as f64;
            mi += c / n * (c * n / (row_sums[a] as f64 * col_sums[b] as f64)).ln();
        }
    }
    Ok((mi / (0.5 * (h_pred + h_true))).clamp(0.0, 1.0))
}

/// NMI plus pairwise precision/recall/F1, where a positive is a same-cluster pair.
///
/// Precision (recall) is 1 when there are no predicted (true) positive pairs.
pub fn score(predicted: &Partition, truth: &Partition) -> Result<ScoreReport> {
    let nmi = nmi(predicted, truth)?;
    let table = contingency(predicted, truth);
    let both: usize = table.iter().flatten().map(|&c| pair_count(c)).sum();
    let pred_pos: usize = predicted.sizes().iter().map(|&s| pair_count(s)).sum();
    let true_pos: usize = truth.sizes().iter().map(|&s| pair_count(s)).sum();
    let ratio = |num: usize, den: usize| if den == 0 { 1.0 } else { num as f64 / den as f64 };
    let precision = ratio(both, pred_pos);
    let recall = ratio(both, true_pos);
    let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
    Ok(ScoreReport {
        nmi,
        pairwise_precision: precision,
        pairwise_recall: recall,
        pairwise_f1: f1,
        k_predicted: predicted.k(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::validate_partition;
    use proptest::prelude::*;

    fn p(l: &[usize]) -> Partition {
        validate_partition(l).unwrap()
    }

    #[test]
    fn permutation_scores_one() {
        let r = score(&p(&[1, 1, 2, 2]), &p(&[2, 2, 1, 1])).unwrap();
        assert_eq!(r.nmi, 1.0);
        assert_eq!(r.pairwise_f1, 1.0);
    }

    #[test]
    fn constant_prediction_scores_zero() {
        let r = score(&p(&[1, 1, 1, 1]), &p(&[1, 1, 2, 2])).unwrap();
        assert_eq!(r.nmi, 0.0);
        assert_eq!(r.k_predicted, 1);
    }

    #[test]
    fn orthogonal_split_by_hand() {
        // every contingency cell holds one node: p_ab = 1/4 = p_a * p_b, so I = 0.
        // predicted pairs {0,2},{1,3}; neither is a true pair.
        let r = score(&p(&[1, 2, 1, 2]), &p(&[1, 1, 2, 2])).unwrap();
        assert_eq!(r.nmi, 0.0);
        assert_eq!(r.pairwise_precision, 0.0);
        assert_eq!(r.pairwise_recall, 0.0);
        assert_eq!(r.pairwise_f1, 0.0);
    }

    #[test]
    fn hand_computed_nmi() {
        // table [[2,0],[1,1]]: H(pred)=ln2, H(true)=-(3/4 ln 3/4 + 1/4 ln 1/4)
        let h_t = -(0.75f64 * 0.75f64.ln() + 0.25 * 0.25f64.ln());
        let mi = 0.5 * (2.0f64 * 4.0 / (2.0 * 3.0)).ln() + 0.25 * (4.0f64 / 6.0).ln() + 0.25 * 2.0f64.ln();
        let expect = mi / (0.5 * (2.0f64.ln() + h_t));
        let got = nmi(&p(&[1, 1, 2, 2]), &p(&[1, 1, 1, 2])).unwrap();
        assert!((got - expect).abs() < 1e-12);
    }

    #[test]
    fn single_clusters_on_both_sides() {
        assert_eq!(nmi(&p(&[1, 1, 1]), &p(&[4, 4, 4])).unwrap(), 1.0);
    }

    #[test]
    fn length_mismatch() {
        assert!(score(&p(&[1, 1]), &p(&[1, 1, 1])).is_err());
    }

    proptest! {
        #[test]
        fn nmi_is_symmetric_bounded_and_relabel_invariant(
            a in prop::collection::vec(0usize..5, 2..40),
            seed in 0usize..100,
        ) {
            let n = a.len();
            let b: Vec<usize> = (0..n).map(|i| (i * 7 + seed) % 4).collect();
            let pa = p(&a);
            let pb = p(&b);
            let ab = nmi(&pa, &pb).unwrap();
            let ba = nmi(&pb, &pa).unwrap();
            prop_assert!((ab - ba).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&ab));
            let renamed: Vec<usize> = a.iter().map(|&l| 100 - l).collect();
            prop_assert!((nmi(&p(&renamed), &pb).unwrap() - ab).abs() < 1e-12);
            prop_assert!((nmi(&pa, &p(&renamed)).unwrap() - 1.0).abs() < 1e-12);
        }
    }
}
