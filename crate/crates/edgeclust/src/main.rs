use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use edgeclust::io::{
    check_node_count, load_graph, load_pairs, load_samples, read_json, save_graph, write_csv, write_json, write_pairs,
};
use edgeclust::pipeline::{
    fit_model, graph_from_log_densities, holdout_samples, log_densities, stage_rng, thread_pool, FittedModel,
};
use edgeclust::{run_pipeline, Algorithm, AppError, AppResult, DataSource, RunConfig, StageExt};
use edgeclust_core::baselines::{kmeans, spectral, SpectralConfig};
use edgeclust_core::corrclust::{brute_force_optimum, disagreement_cost, kwik_cluster, solve_with_metric};
use edgeclust_core::datagen::{gen_synthetic, SyntheticSpec};
use edgeclust_core::edge_features::{sample_pair_labels, EdgeFeatureSet, LabeledPairSet, Similarity};
use edgeclust_core::{score, Partition, SampleSet};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "edgeclust", version, about = "Clustering by learned edge densities and correlation clustering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labeled synthetic point set as CSV.
    Gen(GenArgs),
    /// Sample labeled training pairs `i,j,same` from a labeled CSV.
    Pairs(PairsArgs),
    /// Fit P1 and P0 on labeled pairs and write the model as JSON.
    Fit(FitArgs),
    /// Build the signed log-odds graph of all pairs of a point set.
    Graph(GraphArgs),
    /// Cluster a signed graph.
    Cluster(ClusterArgs),
    /// Run k-means or spectral clustering on a point set.
    Baseline(BaselineArgs),
    /// Score a partition against the labels of a point set.
    Eval(EvalArgs),
    /// Solve the LP relaxation of a graph and report its bound.
    Certify(CertifyArgs),
    /// Draw a partition of a point set as SVG.
    Plot(PlotArgs),
    /// Run every stage and write the full report.
    Pipeline(PipelineArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SimilarityArg {
    Absdiff,
    Euclid,
}

impl From<SimilarityArg> for Similarity {
    fn from(s: SimilarityArg) -> Self {
        match s {
            SimilarityArg::Absdiff => Similarity::AbsDiff,
            SimilarityArg::Euclid => Similarity::Euclidean,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Crossbones,
    Grid,
    Blobs,
    Circles,
}

#[derive(Clone, Copy, ValueEnum)]
enum BaselineMethod {
    Kmeans,
    Spectral,
}

/// `--pca off` or a variance target.
#[derive(Clone, Copy, Debug)]
struct PcaArg(Option<f64>);

fn parse_pca(s: &str) -> Result<PcaArg, String> {
    if s.eq_ignore_ascii_case("off") {
        return Ok(PcaArg(None));
    }
    let v: f64 = s.parse().map_err(|_| format!("expected a number in (0, 1] or 'off', got '{s}'"))?;
    if v > 0.0 && v <= 1.0 {
        Ok(PcaArg(Some(v)))
    } else {
        Err(format!("{v} is not in (0, 1]"))
    }
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum, default_value = "crossbones")]
    kind: KindArg,
    #[arg(long, default_value_t = 100)]
    n: usize,
    /// Cluster count; ignored by crossbones.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PairsArgs {
    /// Labeled point set (CSV with the label last, or JSON).
    #[arg(long)]
    samples: PathBuf,
    #[arg(long, default_value_t = 5000)]
    pairs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    samples: PathBuf,
    /// Training pairs `i,j,same` indexing rows of `--samples`.
    #[arg(long = "pair-file")]
    pair_file: PathBuf,
    #[arg(long, value_enum, default_value = "absdiff")]
    similarity: SimilarityArg,
    #[arg(long, value_parser = parse_pca, default_value = "off")]
    pca: PcaArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GraphArgs {
    #[arg(long)]
    model: PathBuf,
    /// Points to connect; labels, if present, are ignored.
    #[arg(long)]
    samples: PathBuf,
    #[arg(long)]
    labeled: bool,
    #[arg(long, default_value_t = 0.0)]
    sparsify: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ClusterArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, value_enum, default_value = "lp")]
    algo: Algorithm,
    /// Seed for the pivot order.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Partition output (JSON label array); stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BaselineArgs {
    #[arg(long)]
    samples: PathBuf,
    #[arg(long)]
    labeled: bool,
    #[arg(long, value_enum)]
    method: BaselineMethod,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 20)]
    knn: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Labeled point set holding the truth.
    #[arg(long)]
    samples: PathBuf,
    #[arg(long)]
    partition: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CertifyArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Also report the cost of this partition against the LP bound.
    #[arg(long)]
    partition: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long)]
    samples: PathBuf,
    #[arg(long)]
    labeled: bool,
    /// Partition to color by; the sample labels when absent.
    #[arg(long)]
    partition: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PipelineArgs {
    /// RunConfig JSON; flags given on the command line override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Labeled CSV to split into hold-out and training rows instead of synthetic data.
    #[arg(long, conflicts_with = "kind")]
    csv: Option<PathBuf>,
    #[arg(long, value_enum)]
    kind: Option<KindArg>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    similarity: Option<SimilarityArg>,
    #[arg(long)]
    sparsify: Option<f64>,
    #[arg(long, value_parser = parse_pca)]
    pca: Option<PcaArg>,
    #[arg(long, value_enum)]
    algo: Option<Algorithm>,
    #[arg(long)]
    pairs: Option<usize>,
    #[arg(long)]
    holdout: Option<usize>,
    #[arg(long = "train-pool")]
    train_pool: Option<usize>,
    #[arg(long = "no-baselines")]
    no_baselines: bool,
    /// Include wall-clock timing in the report.
    #[arg(long)]
    timing: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also draw the hold-out partition as SVG (synthetic or CSV data only).
    #[arg(long)]
    svg: Option<PathBuf>,
}

fn synthetic_spec(kind: KindArg, n: usize, k: Option<usize>) -> SyntheticSpec {
    match kind {
        KindArg::Crossbones => SyntheticSpec::crossbones(n),
        KindArg::Grid => SyntheticSpec::grid(n, k.unwrap_or(4)),
        KindArg::Blobs => SyntheticSpec::blobs(n, k.unwrap_or(3)),
        KindArg::Circles => SyntheticSpec::circles(n),
    }
}

/// Like `println!`, but a closed pipe is not an error.
fn print_stdout(text: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn emit<T: Serialize>(out: Option<&Path>, value: &T) -> AppResult<()> {
    match out {
        Some(path) => write_json(path, value),
        None => {
            print_stdout(&serde_json::to_string_pretty(value).expect("value is serializable"));
            Ok(())
        }
    }
}

fn truth_of(s: &SampleSet, path: &Path) -> AppResult<Partition> {
    s.labels().cloned().ok_or_else(|| AppError::data(path, "no label column"))
}

fn gen(a: GenArgs) -> AppResult<()> {
    let mut spec = synthetic_spec(a.kind, a.n, a.k);
    if let Some(noise) = a.noise {
        spec.noise = noise;
    }
    spec.validate().map_err(|e| AppError::Config(e.to_string()))?;
    let s = gen_synthetic(&spec, &mut stage_rng(a.seed, 1)).stage("data")?;
    write_csv(&a.out, &s)
}

fn pairs(a: PairsArgs) -> AppResult<()> {
    let s = load_samples(&a.samples, true)?;
    let truth = truth_of(&s, &a.samples)?;
    let labeled = sample_pair_labels(&truth, a.pairs, &mut stage_rng(a.seed, 2)).stage("pairs")?;
    write_pairs(&a.out, &labeled)
}

fn fit(a: FitArgs) -> AppResult<()> {
    let s = load_samples(&a.samples, true)?;
    let labeled = load_pairs(&a.pair_file)?;
    let (pairs, same): (Vec<_>, Vec<bool>) = labeled.into_iter().unzip();
    let similarity = Similarity::from(a.similarity);
    let features = EdgeFeatureSet::from_samples(&s, pairs, similarity).stage("pairs")?;
    let train = LabeledPairSet::from_labeled(&features, &same).stage("pairs")?;
    let model = fit_model(&train, similarity, a.pca.0).stage("fit")?;
    write_json(&a.out, &model)
}

fn graph(a: GraphArgs) -> AppResult<()> {
    if a.sparsify.is_nan() || a.sparsify < 0.0 {
        return Err(AppError::Config(format!("sparsify threshold {} must be >= 0", a.sparsify)));
    }
    let model: FittedModel = read_json(&a.model)?;
    let s = load_samples(&a.samples, a.labeled)?;
    let features = EdgeFeatureSet::complete(&s, model.similarity).stage("features")?;
    let features = model.project(&features).stage("graph")?;
    let g = thread_pool()?.install(|| -> AppResult<_> {
        let (ln_p1, ln_p0) = log_densities(&features, &model.p1, &model.p0).stage("graph")?;
        graph_from_log_densities(s.len(), &features, &ln_p1, &ln_p0, a.sparsify).stage("graph")
    })?;
    save_graph(&a.out, &g)
}

#[derive(Serialize)]
struct CertifyReport {
    n: usize,
    lp_lower_bound: f64,
    rounded_cost: f64,
    c1: f64,
    bound_rhs: f64,
    max_triangle_violation: f64,
    cut_rounds: usize,
    labels: Vec<usize>,
    partition_cost: Option<f64>,
}

fn cluster(a: ClusterArgs) -> AppResult<()> {
    let g = load_graph(&a.graph)?;
    let p = match a.algo {
        Algorithm::Lp => solve_with_metric(&g).stage("solve")?.0,
        Algorithm::Pivot => kwik_cluster(&g, &mut stage_rng(a.seed, 3)),
        Algorithm::Oracle => brute_force_optimum(&g).stage("solve")?.0,
    };
    emit(a.out.as_deref(), &p)
}

fn certify(a: CertifyArgs) -> AppResult<()> {
    let g = load_graph(&a.graph)?;
    let (p, cert, metric) = solve_with_metric(&g).stage("solve")?;
    let partition_cost = match &a.partition {
        Some(path) => {
            let q: Partition = read_json(path)?;
            check_node_count(&g, q.len())?;
            Some(disagreement_cost(&g, &q).stage("solve")?)
        }
        None => None,
    };
    let report = CertifyReport {
        n: cert.n,
        lp_lower_bound: cert.lp_lower_bound,
        rounded_cost: cert.rounded_cost,
        c1: cert.c1,
        bound_rhs: cert.bound_rhs,
        max_triangle_violation: metric.as_ref().map_or(0.0, |m| m.max_violation),
        cut_rounds: metric.as_ref().map_or(0, |m| m.cut_rounds),
        labels: p.labels().to_vec(),
        partition_cost,
    };
    emit(a.out.as_deref(), &report)
}

fn baseline(a: BaselineArgs) -> AppResult<()> {
    let s = load_samples(&a.samples, a.labeled)?;
    let p = match a.method {
        BaselineMethod::Kmeans => kmeans(&s, a.k, &mut stage_rng(a.seed, 4)).stage("kmeans")?.partition,
        BaselineMethod::Spectral => {
            let cfg = SpectralConfig { knn: a.knn, ..SpectralConfig::new(a.k) };
            spectral(&s, &cfg, &mut stage_rng(a.seed, 5)).stage("spectral")?
        }
    };
    emit(a.out.as_deref(), &p)
}

fn eval(a: EvalArgs) -> AppResult<()> {
    let s = load_samples(&a.samples, true)?;
    let truth = truth_of(&s, &a.samples)?;
    let p: Partition = read_json(&a.partition)?;
    emit(a.out.as_deref(), &score(&p, &truth).stage("score")?)
}

fn plot(a: PlotArgs) -> AppResult<()> {
    let s = load_samples(&a.samples, a.labeled)?;
    let p = match &a.partition {
        Some(path) => read_json(path)?,
        None => truth_of(&s, &a.samples)?,
    };
    edgeclust::svg::render_svg(&s, &p, &a.out)
}

fn pipeline(a: PipelineArgs) -> AppResult<()> {
    let mut cfg = match &a.config {
        Some(path) => read_json::<RunConfig>(path).map_err(|e| AppError::Config(e.to_string()))?,
        None => RunConfig::crossbones(0),
    };
    if let Some(path) = &a.csv {
        cfg.data = DataSource::Csv { path: path.clone(), has_labels: true };
    }
    if let Some(kind) = a.kind {
        let n = a.holdout.unwrap_or(cfg.holdout);
        cfg.data = DataSource::Synthetic { spec: synthetic_spec(kind, n, None) };
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if let Some(v) = a.similarity {
        cfg.similarity = v.into();
    }
    if let Some(v) = a.sparsify {
        cfg.sparsify = v;
    }
    if let Some(v) = a.pca {
        cfg.pca = v.0;
    }
    if let Some(v) = a.algo {
        cfg.algo = v;
    }
    if let Some(v) = a.pairs {
        cfg.pairs = v;
    }
    if let Some(v) = a.holdout {
        cfg.holdout = v;
    }
    if let Some(v) = a.train_pool {
        cfg.train_pool = v;
    }
    if a.no_baselines {
        cfg.baselines = false;
    }
    cfg.resolve();
    let report = run_pipeline(&cfg)?;
    let json = report.to_json(a.timing);
    match &a.out {
        Some(path) => std::fs::write(path, json + "\n").map_err(|e| AppError::io(path, e))?,
        None => print_stdout(&json),
    }
    if let Some(path) = &a.svg {
        let s = holdout_samples(&report.config)?
            .ok_or_else(|| AppError::Config("edge-level data has no points to plot".into()))?;
        let p = edgeclust_core::validate_partition(&report.labels).stage("plot")?;
        edgeclust::svg::render_svg(&s, &p, path)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => gen(a),
        Command::Pairs(a) => pairs(a),
        Command::Fit(a) => fit(a),
        Command::Graph(a) => graph(a),
        Command::Cluster(a) => cluster(a),
        Command::Baseline(a) => baseline(a),
        Command::Eval(a) => eval(a),
        Command::Certify(a) => certify(a),
        Command::Plot(a) => plot(a),
        Command::Pipeline(a) => pipeline(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
