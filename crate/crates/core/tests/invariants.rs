use edgeclust_core::analysis::{expected_dis, log_likelihood};
use edgeclust_core::baselines::{spectral, SpectralConfig};
use edgeclust_core::corrclust::{brute_force_optimum, disagreement_cost, kwik_cluster, solve_with_metric};
use edgeclust_core::datagen::{gen_edge_level, gen_synthetic, EdgeLevelSpec, SyntheticSpec};
use edgeclust_core::density::{
    build_signed_graph, kde_fit, log_odds, Density, EdgeDensity, Sign, SignedEdge, SignedWeightedGraph,
};
use edgeclust_core::edge_features::{EdgeFeatureSet, Similarity};
use edgeclust_core::metrics::nmi;
use edgeclust_core::partition::{all_pairs, pair_count};
use edgeclust_core::{validate_partition, Matrix, SampleSet};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn matrix(rows: &[Vec<f64>]) -> Matrix {
    Matrix::from_rows(rows).unwrap()
}

fn points(d: usize, len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-5.0f64..5.0, d), len)
}

fn graph_strategy() -> impl Strategy<Value = SignedWeightedGraph> {
    (3usize..=7).prop_flat_map(|n| {
        prop::collection::vec((any::<bool>(), 0.0f64..3.0), pair_count(n)).prop_map(move |raw| {
            let mut edges = Vec::new();
            let mut dropped = Vec::new();
            for (pair, (plus, cost)) in all_pairs(n).zip(raw) {
                if cost < 0.3 {
                    dropped.push(pair);
                } else {
                    edges.push(SignedEdge { pair, sign: if plus { Sign::Plus } else { Sign::Minus }, cost });
                }
            }
            SignedWeightedGraph::new(n, edges, dropped).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn log_odds_sign_matches_cost_and_flips(
        a in points(2, 2..30),
        b in points(2, 2..30),
        e in prop::collection::vec(-8.0f64..8.0, 2),
    ) {
        let (p1, p0) = (kde_fit(&matrix(&a)).unwrap(), kde_fit(&matrix(&b)).unwrap());
        let (s, c) = log_odds(&p1, &p0, &e).unwrap();
        let (s_rev, c_rev) = log_odds(&p0, &p1, &e).unwrap();
        prop_assert!(c >= 0.0 && c.is_finite());
        prop_assert_eq!(s == 0, c == 0.0);
        prop_assert_eq!(s, -s_rev);
        prop_assert_eq!(c, c_rev);
        prop_assert!(p1.ln_pdf(&e).unwrap().is_finite());
    }

    #[test]
    fn graph_partitions_the_pair_set(
        nodes in points(2, 3..9),
        a in points(2, 2..20),
        b in points(2, 2..20),
        threshold in 0.0f64..2.0,
    ) {
        let s = SampleSet::new(matrix(&nodes), None).unwrap();
        let f = EdgeFeatureSet::complete(&s, Similarity::AbsDiff).unwrap();
        let (p1, p0) = (kde_fit(&matrix(&a)).unwrap(), kde_fit(&matrix(&b)).unwrap());
        let g = build_signed_graph(&f, &p1, &p0, threshold).unwrap();
        prop_assert_eq!(g.edges().len() + g.dropped().len(), f.len());
        prop_assert!(g.edges().iter().all(|e| e.cost > threshold && e.cost.is_finite()));
    }

    #[test]
    fn likelihood_decomposes_for_any_partition(
        nodes in points(2, 2..8),
        labels in prop::collection::vec(0usize..4, 8),
        a in points(2, 2..20),
        b in points(2, 2..20),
    ) {
        let n = nodes.len();
        let s = SampleSet::new(matrix(&nodes), None).unwrap();
        let f = EdgeFeatureSet::complete(&s, Similarity::AbsDiff).unwrap();
        let (p1, p0) = (kde_fit(&matrix(&a)).unwrap(), kde_fit(&matrix(&b)).unwrap());
        let p = validate_partition(&labels[..n]).unwrap();
        let r = log_likelihood(&p, &f, &p1, &p0).unwrap();
        prop_assert!(r.disagreement_term >= 0.0);
        prop_assert!((r.log_likelihood_theta - (r.log_likelihood_g0 - r.disagreement_term)).abs() <= 1e-8);
        prop_assert!(r.log_likelihood_theta <= r.log_likelihood_g0 + 1e-12);
    }

    #[test]
    fn expected_dis_is_nonnegative(mu in -1.0f64..3.0, sd in 0.5f64..2.0, seed in any::<u64>()) {
        let p1 = EdgeDensity::gaussian(vec![0.0], vec![1.0]).unwrap();
        let p0 = EdgeDensity::gaussian(vec![mu], vec![sd]).unwrap();
        let r = expected_dis(&p1, &p0, 3, 5, 2000, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert!(r.estimate >= -3.0 * r.std_error);
        prop_assert!(r.std_error >= 0.0);
    }

    #[test]
    fn lp_sandwich_and_feasible_metric(g in graph_strategy()) {
        let (p, cert, metric) = solve_with_metric(&g).unwrap();
        let (_, opt) = brute_force_optimum(&g).unwrap();
        let cost = disagreement_cost(&g, &p).unwrap();
        prop_assert!(cert.lp_lower_bound <= opt + 1e-6);
        prop_assert!(opt <= cost + 1e-6);
        prop_assert!((cost - cert.rounded_cost).abs() <= 1e-6);
        prop_assert!(cost <= cert.bound_rhs + 1e-6);
        if let Some(m) = metric {
            prop_assert!(m.max_violation <= 1e-6);
        }
    }

    #[test]
    fn pivot_never_beats_the_optimum(g in graph_strategy(), seed in any::<u64>()) {
        let p = kwik_cluster(&g, &mut ChaCha8Rng::seed_from_u64(seed));
        let (_, opt) = brute_force_optimum(&g).unwrap();
        prop_assert_eq!(p.len(), g.n());
        prop_assert!(disagreement_cost(&g, &p).unwrap() >= opt - 1e-9);
    }

    #[test]
    fn edge_level_counts_and_reproducibility(sizes in prop::collection::vec(1usize..5, 1..4), seed in any::<u64>()) {
        let spec = EdgeLevelSpec {
            sizes: sizes.clone(),
            p1: EdgeDensity::gaussian(vec![0.0], vec![1.0]).unwrap(),
            p0: EdgeDensity::gaussian(vec![2.0], vec![1.0]).unwrap(),
        };
        let n: usize = sizes.iter().sum();
        prop_assume!(n >= 2);
        let (f, truth) = gen_edge_level(&spec, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let (f2, _) = gen_edge_level(&spec, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let (n1, n0) = truth.pair_counts();
        prop_assert_eq!(n1 + n0, pair_count(n));
        prop_assert_eq!(f.len(), pair_count(n));
        prop_assert_eq!(f, f2);
    }

    #[test]
    fn synthetic_label_counts_match_sizes(n in 6usize..60, k in 1usize..5, seed in any::<u64>()) {
        let spec = SyntheticSpec::blobs(n, k);
        let s = gen_synthetic(&spec, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let mut sizes = s.labels().unwrap().sizes();
        let mut expected = spec.sizes();
        sizes.sort_unstable();
        expected.sort_unstable();
        prop_assert_eq!(sizes, expected);
    }
}

#[test]
fn spectral_separates_concentric_circles() {
    for seed in 0..3 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = gen_synthetic(&SyntheticSpec::circles(200), &mut rng).unwrap();
        let p = spectral(&s, &SpectralConfig::new(2), &mut rng).unwrap();
        let score = nmi(&p, s.labels().unwrap()).unwrap();
        assert!((score - 1.0).abs() < 1e-12, "seed {seed}: NMI {score}");
    }
}
