//! End-to-end run: training pairs, density fit, log-odds graph, clustering,
//! scoring and baselines.

use std::path::PathBuf;
use std::time::Instant;

use edgeclust_core::analysis::{empirical_dis, likelihood_from_log_densities, LikelihoodReport};
use edgeclust_core::baselines::{kmeans, spectral, SpectralConfig};
use edgeclust_core::corrclust::{
    brute_force_optimum, disagreement_cost, kwik_cluster, solve_with_metric, SolveCertificate, ORACLE_MAX_NODES,
};
use edgeclust_core::datagen::{gen_edge_level, gen_synthetic, EdgeLevelSpec, SyntheticSpec};
use edgeclust_core::density::{
    clamped_log_ratio, kde_fit, signed_graph_from_log_odds, Density, DensityModel, SignedWeightedGraph,
};
use edgeclust_core::edge_features::{
    pca_fit, pca_transform, sample_labeled_pairs, sample_pair_labels, EdgeFeatureSet, LabeledPairSet, PcaModel,
    Similarity,
};
use edgeclust_core::{score, Error, Partition, SampleSet, ScoreReport};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{AppError, AppResult, StageExt};
use crate::io::load_csv;

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "EDGECLUST_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    /// LP relaxation with region-growing rounding.
    #[default]
    #[serde(alias = "lp_round")]
    #[value(alias = "lp_round")]
    Lp,
    Pivot,
    /// Exhaustive search, at most 12 nodes.
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum DataSource {
    /// Hold-out and training pool are independent draws; `spec.n` is the hold-out size.
    Synthetic { spec: SyntheticSpec },
    /// Rows are shuffled; the first `holdout` are clustered and training pairs
    /// come from up to `train_pool` of the remaining rows.
    Csv { path: PathBuf, has_labels: bool },
    /// Edge vectors drawn directly; training pairs come from a second,
    /// independent draw with the same spec.
    EdgeLevel { spec: EdgeLevelSpec },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub data: DataSource,
    pub seed: u64,
    #[serde(default)]
    pub similarity: Similarity,
    #[serde(default)]
    pub sparsify: f64,
    /// PCA variance target for edge features; `None` leaves them as is.
    #[serde(default)]
    pub pca: Option<f64>,
    #[serde(default)]
    pub algo: Algorithm,
    #[serde(default = "default_pairs")]
    pub pairs: usize,
    #[serde(default = "default_holdout")]
    pub holdout: usize,
    #[serde(default = "default_train_pool")]
    pub train_pool: usize,
    #[serde(default = "default_true")]
    pub baselines: bool,
    #[serde(default = "default_knn")]
    pub knn: usize,
}

fn default_pairs() -> usize {
    5000
}
fn default_holdout() -> usize {
    100
}
fn default_train_pool() -> usize {
    200
}
fn default_true() -> bool {
    true
}
fn default_knn() -> usize {
    20
}

impl RunConfig {
    pub fn new(data: DataSource, seed: u64) -> Self {
        let mut cfg = Self {
            data,
            seed,
            similarity: Similarity::AbsDiff,
            sparsify: 0.0,
            pca: None,
            algo: Algorithm::Lp,
            pairs: default_pairs(),
            holdout: default_holdout(),
            train_pool: default_train_pool(),
            baselines: true,
            knn: default_knn(),
        };
        if let DataSource::Synthetic { spec } = &cfg.data {
            cfg.holdout = spec.n;
        }
        cfg.resolve();
        cfg
    }

    pub fn crossbones(seed: u64) -> Self {
        Self::new(DataSource::Synthetic { spec: SyntheticSpec::crossbones(default_holdout()) }, seed)
    }

    /// Makes the hold-out size and the data spec agree; the edge-level sizes win.
    pub fn resolve(&mut self) {
        match &mut self.data {
            DataSource::Synthetic { spec } => spec.n = self.holdout,
            DataSource::EdgeLevel { spec } => self.holdout = spec.n(),
            DataSource::Csv { .. } => {}
        }
    }

    pub fn validate(&self) -> AppResult<()> {
        let bad = |m: String| Err(AppError::Config(m));
        if self.holdout == 0 {
            return bad("holdout must be >= 1".into());
        }
        if self.pairs == 0 {
            return bad("pairs must be >= 1".into());
        }
        if self.sparsify.is_nan() || self.sparsify < 0.0 {
            return bad(format!("sparsify threshold {} must be >= 0", self.sparsify));
        }
        if let Some(v) = self.pca {
            if !(v > 0.0 && v <= 1.0) {
                return bad(format!("pca variance target {v} not in (0, 1]"));
            }
        }
        if self.algo == Algorithm::Oracle && self.holdout > ORACLE_MAX_NODES {
            return bad(format!("oracle is limited to n <= {ORACLE_MAX_NODES}, got n = {}", self.holdout));
        }
        match &self.data {
            DataSource::Synthetic { spec } => spec.validate().map_err(|e| AppError::Config(e.to_string()))?,
            DataSource::EdgeLevel { spec } => spec.validate().map_err(|e| AppError::Config(e.to_string()))?,
            DataSource::Csv { has_labels, .. } => {
                if !has_labels {
                    return bad("training pairs need a labeled CSV".into());
                }
            }
        }
        if matches!(self.data, DataSource::Synthetic { .. } | DataSource::Csv { .. }) && self.train_pool < 2 {
            return bad("train_pool must be >= 2".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSummary {
    pub same_pairs: usize,
    pub diff_pairs: usize,
    /// Edge feature dimension fed to the densities.
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSummary {
    pub kept: usize,
    pub dropped: usize,
    pub positive: usize,
}

/// Wall seconds per stage.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Timing {
    pub data: f64,
    pub fit: f64,
    pub graph: f64,
    pub solve: f64,
    pub score: f64,
    pub baselines: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsReport {
    pub config: RunConfig,
    pub n: usize,
    pub k_true: Option<usize>,
    pub k_predicted: usize,
    pub labels: Vec<usize>,
    pub training: TrainingSummary,
    pub graph: GraphSummary,
    pub structured: Option<ScoreReport>,
    pub kmeans: Option<ScoreReport>,
    pub spectral: Option<ScoreReport>,
    /// Present for the LP algorithm only.
    pub certificate: Option<SolveCertificate>,
    pub max_triangle_violation: Option<f64>,
    pub disagreement_cost: f64,
    /// Disagreement of the log-odds graph with the true partition.
    pub truth_disagreement: Option<f64>,
    pub likelihood: LikelihoodReport,
    pub timing: Option<Timing>,
}

impl ResultsReport {
    /// Pretty JSON; `timing: null` unless `with_timing`, so equal configs give equal bytes.
    pub fn to_json(&self, with_timing: bool) -> String {
        let mut r = self.clone();
        if !with_timing {
            r.timing = None;
        }
        serde_json::to_string_pretty(&r).expect("report is serializable")
    }
}

/// Densities and the optional projection fitted on training pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    pub similarity: Similarity,
    pub pca: Option<PcaModel>,
    pub p1: DensityModel,
    pub p0: DensityModel,
}

impl FittedModel {
    /// Projects edge features into the densities' space.
    pub fn project(&self, features: &EdgeFeatureSet) -> Result<EdgeFeatureSet, Error> {
        match &self.pca {
            Some(m) => features.map_vectors(pca_transform(m, features.vectors())?),
            None => Ok(features.clone()),
        }
    }
}

/// Fits P1 and P0 by KDE, after PCA on all training vectors when `pca` is set.
pub fn fit_model(train: &LabeledPairSet, similarity: Similarity, pca: Option<f64>) -> Result<FittedModel, Error> {
    let (same, diff, pca) = match pca {
        Some(target) => {
            let mut all = train.same_vectors.clone();
            for row in train.diff_vectors.row_iter() {
                all.push_row(row)?;
            }
            let m = pca_fit(&all, target)?;
            (pca_transform(&m, &train.same_vectors)?, pca_transform(&m, &train.diff_vectors)?, Some(m))
        }
        None => (train.same_vectors.clone(), train.diff_vectors.clone(), None),
    };
    Ok(FittedModel { similarity, pca, p1: kde_fit(&same)?, p0: kde_fit(&diff)? })
}

/// `ln P1(e)` and `ln P0(e)` for every edge, evaluated in parallel in pair order.
pub fn log_densities<P1, P0>(features: &EdgeFeatureSet, p1: &P1, p0: &P0) -> Result<(Vec<f64>, Vec<f64>), Error>
where
    P1: Density + Sync + ?Sized,
    P0: Density + Sync + ?Sized,
{
    let rows: Vec<&[f64]> = features.vectors().row_iter().collect();
    let out: Result<Vec<(f64, f64)>, Error> = rows.par_iter().map(|e| Ok((p1.ln_pdf(e)?, p0.ln_pdf(e)?))).collect();
    Ok(out?.into_iter().unzip())
}

/// The log-odds graph over `n` nodes from per-edge log-densities.
pub fn graph_from_log_densities(
    n: usize,
    features: &EdgeFeatureSet,
    ln_p1: &[f64],
    ln_p0: &[f64],
    sparsify: f64,
) -> Result<SignedWeightedGraph, Error> {
    let ratios: Vec<f64> = ln_p1.iter().zip(ln_p0).map(|(&a, &b)| clamped_log_ratio(a, b)).collect();
    signed_graph_from_log_odds(n, features.pairs(), &ratios, sparsify)
}

/// Worker pool honoring [`THREADS_ENV`].
pub fn thread_pool() -> AppResult<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let threads: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&t| t > 0)
            .ok_or_else(|| AppError::Config(format!("{THREADS_ENV}={v} is not a positive integer")))?;
        builder = builder.num_threads(threads);
    }
    builder.build().map_err(|e| AppError::Config(format!("thread pool: {e}")))
}

/// Independent random stream `stream` of the run seed, so each stage's draws
/// do not depend on the others or on scheduling.
pub fn stage_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

const STREAM_DATA: u64 = 1;
const STREAM_PAIRS: u64 = 2;
const STREAM_SOLVE: u64 = 3;
const STREAM_KMEANS: u64 = 4;
const STREAM_SPECTRAL: u64 = 5;

struct Prepared {
    /// Hold-out nodes when the data has node features.
    holdout: Option<SampleSet>,
    truth: Option<Partition>,
    features: EdgeFeatureSet,
    train: LabeledPairSet,
}

fn labeled_pairs_from(
    features: &EdgeFeatureSet,
    truth: &Partition,
    m: usize,
    rng: &mut ChaCha8Rng,
) -> Result<LabeledPairSet, Error> {
    let labeled = sample_pair_labels(truth, m, rng)?;
    let mut vectors = edgeclust_core::Matrix::zeros(0, features.dim());
    let mut pairs = Vec::with_capacity(labeled.len());
    let mut same = Vec::with_capacity(labeled.len());
    for (e, s) in labeled {
        vectors.push_row(features.get(e).ok_or(Error::MissingPair(e.i, e.j))?)?;
        pairs.push(e);
        same.push(s);
    }
    LabeledPairSet::from_labeled(&EdgeFeatureSet::new(pairs, vectors)?, &same)
}

/// Hold-out points and the training pool for node-level data, drawn from the data stream.
fn split_points(cfg: &RunConfig) -> AppResult<(SampleSet, SampleSet)> {
    let mut rng = stage_rng(cfg.seed, STREAM_DATA);
    match &cfg.data {
        DataSource::Synthetic { spec } => {
            let holdout = gen_synthetic(spec, &mut rng).stage("data")?;
            let pool_spec = SyntheticSpec { n: cfg.train_pool.max(spec.k), ..spec.clone() };
            let pool = gen_synthetic(&pool_spec, &mut rng).stage("data")?;
            Ok((holdout, pool))
        }
        DataSource::Csv { path, has_labels } => {
            let all = load_csv(path, *has_labels)?;
            if all.len() < cfg.holdout + 2 {
                return Err(AppError::data(
                    path,
                    format!("{} rows cannot supply {} hold-out rows plus a training pool", all.len(), cfg.holdout),
                ));
            }
            let mut order: Vec<usize> = (0..all.len()).collect();
            order.shuffle(&mut rng);
            let pool_end = (cfg.holdout + cfg.train_pool).min(all.len());
            let holdout = all.subset(&order[..cfg.holdout]).stage("data")?;
            let pool = all.subset(&order[cfg.holdout..pool_end]).stage("data")?;
            Ok((holdout, pool))
        }
        DataSource::EdgeLevel { .. } => Err(AppError::Config("edge-level data has no node points".into())),
    }
}

/// The hold-out points a run clusters; `None` for edge-level data.
pub fn holdout_samples(cfg: &RunConfig) -> AppResult<Option<SampleSet>> {
    let mut cfg = cfg.clone();
    cfg.resolve();
    match cfg.data {
        DataSource::EdgeLevel { .. } => Ok(None),
        _ => Ok(Some(split_points(&cfg)?.0)),
    }
}

fn prepare(cfg: &RunConfig) -> AppResult<Prepared> {
    let mut pair_rng = stage_rng(cfg.seed, STREAM_PAIRS);
    match &cfg.data {
        DataSource::Synthetic { .. } | DataSource::Csv { .. } => {
            let (holdout, pool) = split_points(cfg)?;
            let train = sample_labeled_pairs(&pool, cfg.pairs, cfg.similarity, &mut pair_rng).stage("pairs")?;
            let features = EdgeFeatureSet::complete(&holdout, cfg.similarity).stage("features")?;
            Ok(Prepared { truth: holdout.labels().cloned(), holdout: Some(holdout), features, train })
        }
        DataSource::EdgeLevel { spec } => {
            let mut rng = stage_rng(cfg.seed, STREAM_DATA);
            let (features, truth) = gen_edge_level(spec, &mut rng).stage("data")?;
            let (train_features, train_truth) = gen_edge_level(spec, &mut rng).stage("data")?;
            let train = labeled_pairs_from(&train_features, &train_truth, cfg.pairs, &mut pair_rng).stage("pairs")?;
            Ok(Prepared { holdout: None, truth: Some(truth), features, train })
        }
    }
}

/// Runs every stage; any failure aborts the run with a stage-tagged error.
pub fn run_pipeline(cfg: &RunConfig) -> AppResult<ResultsReport> {
    let mut cfg = cfg.clone();
    cfg.resolve();
    cfg.validate()?;
    thread_pool()?.install(|| run_resolved(cfg))
}

fn run_resolved(cfg: RunConfig) -> AppResult<ResultsReport> {
    let start = Instant::now();
    let mut timing = Timing::default();
    let mut lap = Instant::now();
    let mut tick = |slot: &mut f64| {
        *slot = lap.elapsed().as_secs_f64();
        lap = Instant::now();
    };

    let prep = prepare(&cfg)?;
    tick(&mut timing.data);

    let model = fit_model(&prep.train, cfg.similarity, cfg.pca).stage("fit")?;
    let training = TrainingSummary {
        same_pairs: prep.train.same_vectors.rows(),
        diff_pairs: prep.train.diff_vectors.rows(),
        dim: model.p1.training_points.cols(),
    };
    tick(&mut timing.fit);

    let n = cfg.holdout;
    let features = model.project(&prep.features).stage("graph")?;
    let (ln_p1, ln_p0) = log_densities(&features, &model.p1, &model.p0).stage("graph")?;
    let g = graph_from_log_densities(n, &features, &ln_p1, &ln_p0, cfg.sparsify).stage("graph")?;
    let graph = GraphSummary {
        kept: g.edges().len(),
        dropped: g.dropped().len(),
        positive: g.edges().iter().filter(|e| e.sign == edgeclust_core::density::Sign::Plus).count(),
    };
    tick(&mut timing.graph);

    let (partition, certificate, max_violation) = match cfg.algo {
        Algorithm::Lp => {
            let (p, cert, metric) = solve_with_metric(&g).stage("solve")?;
            (p, Some(cert), Some(metric.map_or(0.0, |m| m.max_violation)))
        }
        Algorithm::Pivot => (kwik_cluster(&g, &mut stage_rng(cfg.seed, STREAM_SOLVE)), None, None),
        Algorithm::Oracle => (brute_force_optimum(&g).stage("solve")?.0, None, None),
    };
    let cost = disagreement_cost(&g, &partition).stage("solve")?;
    tick(&mut timing.solve);

    let structured = prep.truth.as_ref().map(|t| score(&partition, t)).transpose().stage("score")?;
    let truth_disagreement = prep.truth.as_ref().map(|t| empirical_dis(&g, t)).transpose().stage("score")?;
    let likelihood = likelihood_from_log_densities(&partition, features.pairs(), &ln_p1, &ln_p0).stage("score")?;
    tick(&mut timing.score);

    let (kmeans_score, spectral_score) = match (&prep.holdout, &prep.truth) {
        (Some(s), Some(truth)) if cfg.baselines => {
            let k = truth.k();
            let (km, sp) = rayon::join(
                || kmeans(s, k, &mut stage_rng(cfg.seed, STREAM_KMEANS)).map(|r| r.partition),
                || {
                    let sc = SpectralConfig { knn: cfg.knn, ..SpectralConfig::new(k) };
                    spectral(s, &sc, &mut stage_rng(cfg.seed, STREAM_SPECTRAL))
                },
            );
            let km = score(&km.stage("kmeans")?, truth).stage("kmeans")?;
            let sp = score(&sp.stage("spectral")?, truth).stage("spectral")?;
            (Some(km), Some(sp))
        }
        _ => (None, None),
    };
    tick(&mut timing.baselines);
    timing.total = start.elapsed().as_secs_f64();

    let report = ResultsReport {
        n,
        k_true: prep.truth.as_ref().map(Partition::k),
        k_predicted: partition.k(),
        labels: partition.labels().to_vec(),
        training,
        graph,
        structured,
        kmeans: kmeans_score,
        spectral: spectral_score,
        certificate,
        max_triangle_violation: max_violation,
        disagreement_cost: cost,
        truth_disagreement,
        likelihood,
        timing: Some(timing),
        config: cfg,
    };
    check_finite(&report)?;
    Ok(report)
}

fn check_finite(r: &ResultsReport) -> AppResult<()> {
    let mut values = vec![
        r.disagreement_cost,
        r.likelihood.log_likelihood_theta,
        r.likelihood.log_likelihood_g0,
        r.likelihood.disagreement_term,
    ];
    values.extend(r.truth_disagreement);
    values.extend(r.max_triangle_violation);
    if let Some(c) = &r.certificate {
        values.extend([c.lp_lower_bound, c.rounded_cost, c.c1, c.bound_rhs]);
    }
    for s in [&r.structured, &r.kmeans, &r.spectral].into_iter().flatten() {
        values.extend([s.nmi, s.pairwise_precision, s.pairwise_recall, s.pairwise_f1]);
    }
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite("report")).stage("report")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use edgeclust_core::density::EdgeDensity;

    fn small_crossbones(seed: u64) -> RunConfig {
        let mut cfg = RunConfig::crossbones(seed);
        cfg.holdout = 30;
        cfg.train_pool = 60;
        cfg.pairs = 800;
        cfg.resolve();
        cfg
    }

    #[test]
    fn resolve_syncs_holdout() {
        let cfg = small_crossbones(1);
        match &cfg.data {
            DataSource::Synthetic { spec } => assert_eq!(spec.n, 30),
            _ => unreachable!(),
        }
        let spec = EdgeLevelSpec::balanced(
            9,
            3,
            EdgeDensity::gaussian(vec![0.0], vec![1.0]).unwrap(),
            EdgeDensity::gaussian(vec![3.0], vec![1.0]).unwrap(),
        )
        .unwrap();
        let cfg = RunConfig::new(DataSource::EdgeLevel { spec }, 0);
        assert_eq!(cfg.holdout, 9);
    }

    #[test]
    fn config_round_trips_with_defaults() {
        let cfg = small_crossbones(3);
        let json = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&json).unwrap(), cfg);
        let minimal = r#"{"data":{"source":"synthetic","spec":{"kind":"crossbones","n":100,"k":2,"noise":0.03,
            "segment_length":1.0,"angle_deg":75.0,"spacing":0.5}},"seed":9}"#;
        let parsed: RunConfig = serde_json::from_str(minimal).unwrap();
        assert_eq!(parsed, RunConfig::crossbones(9));
    }

    #[test]
    fn oracle_rejected_above_cap() {
        let mut cfg = RunConfig::crossbones(1);
        cfg.algo = Algorithm::Oracle;
        let err = run_pipeline(&cfg).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn bad_values_are_config_errors() {
        let mut cfg = small_crossbones(1);
        cfg.pca = Some(1.5);
        assert_eq!(run_pipeline(&cfg).unwrap_err().exit_code(), 2);
        let mut cfg = small_crossbones(1);
        cfg.sparsify = -1.0;
        assert_eq!(run_pipeline(&cfg).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn small_run_is_deterministic_and_complete() {
        let cfg = small_crossbones(4);
        let a = run_pipeline(&cfg).unwrap();
        let b = run_pipeline(&cfg).unwrap();
        assert_eq!(a.to_json(false), b.to_json(false));
        assert!(a.to_json(true).contains("\"total\""));
        assert_eq!(a.labels.len(), 30);
        assert!(a.structured.is_some() && a.kmeans.is_some() && a.spectral.is_some());
        assert!(a.max_triangle_violation.unwrap() <= 1e-6);
        let c = a.certificate.as_ref().unwrap();
        assert!(c.lp_lower_bound <= c.rounded_cost + 1e-6);
        assert!((a.disagreement_cost - c.rounded_cost).abs() < 1e-9);
        assert_eq!(a.graph.kept + a.graph.dropped, 30 * 29 / 2);
    }

    #[test]
    fn pivot_and_pca_paths() {
        let mut cfg = small_crossbones(5);
        cfg.algo = Algorithm::Pivot;
        cfg.pca = Some(0.95);
        cfg.baselines = false;
        let r = run_pipeline(&cfg).unwrap();
        assert!(r.certificate.is_none() && r.kmeans.is_none());
        assert_eq!(
            r,
            run_pipeline(&cfg)
                .map(|mut x| {
                    x.timing = r.timing.clone();
                    x
                })
                .unwrap()
        );
    }
}
