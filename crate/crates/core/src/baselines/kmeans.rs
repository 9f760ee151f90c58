use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::{validate_partition, Error, Matrix, Partition, Result, SampleSet};

pub const KMEANS_RESTARTS: usize = 10;
const MAX_LLOYD_ITERATIONS: usize = 300;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub partition: Partition,
    pub inertia: f64,
    /// Inertia after each Lloyd step of the winning restart.
    pub inertia_trace: Vec<f64>,
}

#[inline]
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn plus_plus<R: Rng + ?Sized>(x: &Matrix, k: usize, rng: &mut R) -> Matrix {
    let n = x.rows();
    let mut centers = Matrix::zeros(0, 0);
    centers.push_row(x.row(rng.random_range(0..n))).expect("same width");
    let mut d2: Vec<f64> = (0..n).map(|i| sq_dist(x.row(i), centers.row(0))).collect();
    while centers.rows() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if u < w {
                    pick = i;
                    break;
                }
                u -= w;
            }
            pick
        } else {
            rng.random_range(0..n)
        };
        centers.push_row(x.row(pick)).expect("same width");
        let c = centers.rows() - 1;
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(sq_dist(x.row(i), centers.row(c)));
        }
    }
    centers
}

fn lloyd(x: &Matrix, mut centers: Matrix) -> (Vec<usize>, f64, Vec<f64>) {
    let (n, d, k) = (x.rows(), x.cols(), centers.rows());
    let mut assign = vec![usize::MAX; n];
    let mut trace = Vec::new();
    for _ in 0..MAX_LLOYD_ITERATIONS {
        let mut changed = false;
        for i in 0..n {
            let row = x.row(i);
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for c in 0..k {
                let dist = sq_dist(row, centers.row(c));
                if dist < best_d {
                    best_d = dist;
                    best = c;
                }
            }
            if assign[i] != best {
                assign[i] = best;
                changed = true;
            }
        }
        // empty clusters take the point farthest from its own center
        let mut counts = vec![0usize; k];
        for &a in &assign {
            counts[a] += 1;
        }
        for c in 0..k {
            if counts[c] > 0 {
                continue;
            }
            let far = (0..n).filter(|&i| counts[assign[i]] > 1).max_by(|&a, &b| {
                sq_dist(x.row(a), centers.row(assign[a]))
                    .total_cmp(&sq_dist(x.row(b), centers.row(assign[b])))
                    .then(b.cmp(&a))
            });
            if let Some(i) = far {
                counts[assign[i]] -= 1;
                assign[i] = c;
                counts[c] = 1;
                changed = true;
            }
        }
        let mut sums = Matrix::zeros(k, d);
        for i in 0..n {
            for (s, v) in sums.row_mut(assign[i]).iter_mut().zip(x.row(i)) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                let inv = 1.0 / counts[c] as f64;
                for (dst, s) in centers.row_mut(c).iter_mut().zip(sums.row(c)) {
                    *dst = s * inv;
                }
            }
        }
        trace.push((0..n).map(|i| sq_dist(x.row(i), centers.row(assign[i]))).sum());
        if !changed {
            break;
        }
    }
    let inertia = *trace.last().expect("at least one iteration");
    (assign, inertia, trace)
}

/// k-means++ seeding and Lloyd iterations, best of `restarts` by inertia.
pub fn kmeans_matrix<R: Rng + ?Sized>(x: &Matrix, k: usize, restarts: usize, rng: &mut R) -> Result<KMeansResult> {
    let n = x.rows();
    if n == 0 {
        return Err(Error::Empty("k-means input"));
    }
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(alloc::format!("k-means needs 1 <= k <= n, got k={k}, n={n}")));
    }
    if !x.is_finite() {
        return Err(Error::NonFinite("k-means input"));
    }
    let mut best: Option<(Vec<usize>, f64, Vec<f64>)> = None;
    for _ in 0..restarts.max(1) {
        let run = lloyd(x, plus_plus(x, k, rng));
        if best.as_ref().is_none_or(|b| run.1 < b.1) {
            best = Some(run);
        }
    }
    let (assign, inertia, inertia_trace) = best.expect("one restart");
    let labels: Vec<usize> = assign.iter().map(|a| a + 1).collect();
    Ok(KMeansResult { partition: validate_partition(&labels)?, inertia, inertia_trace })
}

/// k-means on node features with [`KMEANS_RESTARTS`] restarts.
pub fn kmeans<R: Rng + ?Sized>(s: &SampleSet, k: usize, rng: &mut R) -> Result<KMeansResult> {
    kmeans_matrix(s.features(), k, KMEANS_RESTARTS, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::nmi;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn samples(rows: &[[f64; 2]], labels: Vec<usize>) -> SampleSet {
        SampleSet::new(Matrix::from_rows(rows).unwrap(), Some(labels)).unwrap()
    }

    #[test]
    fn separated_pairs() {
        let s = samples(&[[0.0, 0.0], [0.1, 0.0], [10.0, 10.0], [10.0, 10.1]], vec![1, 1, 2, 2]);
        let r = kmeans(&s, 2, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(nmi(&r.partition, s.labels().unwrap()).unwrap(), 1.0);
    }

    #[test]
    fn one_cluster_inertia_is_total_scatter() {
        let rows = [[0.0, 1.0], [2.0, 3.0], [4.0, -1.0], [1.0, 1.0]];
        let s = samples(&rows, vec![1, 1, 1, 1]);
        let r = kmeans(&s, 1, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        let cov = s.features().covariance();
        let expect = (cov[(0, 0)] + cov[(1, 1)]) * 3.0; // (n-1) * trace
        assert!((r.inertia - expect).abs() < 1e-12);
        assert_eq!(r.partition.k(), 1);
    }

    #[test]
    fn k_equals_n_has_zero_inertia() {
        let s = samples(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [5.0, 5.0]], vec![1, 2, 3, 4]);
        let r = kmeans(&s, 4, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(r.inertia, 0.0);
        assert_eq!(r.partition.k(), 4);
    }

    #[test]
    fn k_larger_than_n_rejected() {
        let s = samples(&[[0.0, 0.0]], vec![1]);
        assert!(kmeans(&s, 2, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }

    #[test]
    fn duplicate_points_still_fill_every_cluster() {
        let s = samples(&[[1.0, 1.0], [1.0, 1.0], [1.0, 1.0], [2.0, 2.0]], vec![1, 1, 1, 2]);
        let r = kmeans(&s, 3, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(r.partition.k(), 3);
    }

    proptest! {
        #[test]
        fn inertia_never_increases(seed in 0u64..1000, k in 1usize..5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let data: Vec<f64> = (0..60).map(|_| rng.random_range(-3.0..3.0)).collect();
            let x = Matrix::from_vec(30, 2, data).unwrap();
            let r = kmeans_matrix(&x, k, 3, &mut rng).unwrap();
            for w in r.inertia_trace.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-9);
            }
        }

        #[test]
        fn seeded_runs_repeat(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let data: Vec<f64> = (0..40).map(|_| rng.random_range(-3.0..3.0)).collect();
            let x = Matrix::from_vec(20, 2, data).unwrap();
            let a = kmeans_matrix(&x, 3, 4, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            let b = kmeans_matrix(&x, 3, 4, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
