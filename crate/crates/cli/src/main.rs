mod io;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use pathattr::gig::{gig_attribute, GigConfig};
use pathattr::model::{load_model, save_model, AnalyticForm, Model, FORMAT_VERSION};
use pathattr::quadrature::QuadratureConfig;
use pathattr::shapley::{
    expected_attribution, shapley_exact, shapley_sampled, ConvergenceReport, ExpectationConfig, ReferenceSet,
    SamplingConfig,
};
use pathattr::synth::{
    derive_seed, gen_double_gaussian, gen_uniform_background, run_ratio_experiment, summarize_ratios, train_extra_trees,
    Bounds, ExperimentConfig, GaussianSpec, ToyFieldSpec, TrainerConfig, EXPERIMENT_CSV_HEADER,
};
use pathattr::throughput::{normalized_growth, time_gig_scaling};
use pathattr::Execution;

use io::{num, read_dataset, read_file, read_points, write_atomic, write_manifest};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unreadable or malformed files.
    Input(String),
    /// Valid input the engines could not handle.
    Compute(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Compute(_) => 3,
        }
    }
}

impl From<pathattr::Error> for CliError {
    fn from(e: pathattr::Error) -> Self {
        if e.is_input_error() {
            CliError::Input(e.to_string())
        } else {
            CliError::Compute(e.to_string())
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Compute(m) => write!(f, "computation error: {m}"),
        }
    }
}

#[derive(Parser)]
#[command(name = "pathattr", version, about = "Path-integral and Shapley attributions for tree ensembles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Attribute each explanation point against a reference population.
    Attribute(AttributeArgs),
    /// Sample the two-Gaussian toy dataset.
    GenData(GenDataArgs),
    /// Train an extremely randomized trees classifier on a dataset.
    Train(TrainArgs),
    /// Run the background-count ratio experiment.
    Experiment(ExperimentArgs),
    /// Time attribution on stump ensembles of increasing size.
    Bench(BenchArgs),
    /// Summarize a model file.
    ModelInfo(ModelInfoArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Gig,
    ShapleyExact,
    ShapleySampled,
}

impl MethodArg {
    fn as_str(self) -> &'static str {
        match self {
            MethodArg::Gig => "gig",
            MethodArg::ShapleyExact => "shapley-exact",
            MethodArg::ShapleySampled => "shapley-sampled",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct AttributeArgs {
    #[arg(long)]
    model: PathBuf,
    /// CSV of reference points (header row; first n_features columns used).
    #[arg(long)]
    refs: PathBuf,
    /// CSV of explanation points.
    #[arg(long)]
    points: PathBuf,
    #[arg(long, value_enum, default_value = "gig")]
    method: MethodArg,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Stop averaging over references once every stderr is below this (0: use all).
    #[arg(long, default_value_t = 0.0)]
    target_stderr: f64,
    #[arg(long, default_value_t = pathattr::gig::DEFAULT_CORNER_LIMIT)]
    corner_limit: usize,
    /// Permutation cap per reference for shapley-sampled.
    #[arg(long, default_value_t = 10_000)]
    max_permutations: usize,
    /// Per-reference stderr target for shapley-sampled.
    #[arg(long, default_value_t = 1e-3)]
    sample_stderr: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GaussiansArg {
    Default,
}

#[derive(Args)]
struct GenDataArgs {
    #[arg(long, value_enum, default_value = "default")]
    gaussians: GaussiansArg,
    /// Samples per Gaussian.
    #[arg(long, default_value_t = 300)]
    n: usize,
    /// Uniform background samples.
    #[arg(long, default_value_t = 0)]
    background: usize,
    /// Background box as lo1,lo2,hi1,hi2.
    #[arg(long, value_delimiter = ',', num_args = 4, default_values_t = [-1.0, -1.0, 2.0, 2.0])]
    bounds: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    /// Dataset CSV (x1,x2,label,source).
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    n_trees: usize,
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long, default_value_t = 2)]
    min_samples_split: usize,
    /// Candidate features per node, a count or `all`.
    #[arg(long, default_value = "1", value_parser = parse_max_features)]
    max_features: MaxFeatures,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [0usize, 25, 100, 200])]
    background: Vec<usize>,
    /// One run per seed.
    #[arg(long, value_delimiter = ',', default_values_t = [0u64])]
    seed: Vec<u64>,
    /// Use one dataset for all seeds instead of sampling per seed.
    #[arg(long)]
    data_seed: Option<u64>,
    #[arg(long, default_value_t = 100)]
    n_trees: usize,
    #[arg(long, default_value_t = 0.0)]
    target_stderr: f64,
    #[arg(long, default_value_t = pathattr::gig::DEFAULT_CORNER_LIMIT)]
    corner_limit: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [10usize, 100, 1000])]
    trees: Vec<usize>,
    #[arg(long, default_value_t = 4)]
    features: usize,
    #[arg(long, default_value_t = 2000)]
    pairs: usize,
    #[arg(long, default_value_t = 5)]
    repeats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest allowed (t_N / t_first) / (N / first) between the smallest and any larger size.
    #[arg(long, default_value_t = 3.0)]
    max_growth: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ModelInfoArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Attribute(a) => cmd_attribute(&a),
        Command::GenData(a) => cmd_gen_data(&a),
        Command::Train(a) => cmd_train(&a),
        Command::Experiment(a) => cmd_experiment(&a),
        Command::Bench(a) => cmd_bench(&a),
        Command::ModelInfo(a) => cmd_model_info(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pathattr: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn load_model_file(path: &Path) -> Result<Model, CliError> {
    let bytes = read_file(path)?;
    load_model(&bytes).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn tolerances() -> serde_json::Value {
    let q = QuadratureConfig::default();
    json!({
        "quadrature_rel_tol": q.rel_tol,
        "quadrature_abs_tol": q.abs_tol,
        "quadrature_max_depth": q.max_depth,
        "tree_efficiency": 1e-9,
    })
}

fn cmd_attribute(a: &AttributeArgs) -> Result<(), CliError> {
    if !(a.target_stderr >= 0.0) || !(a.sample_stderr >= 0.0) {
        return Err(CliError::Input("stderr targets must be non-negative".into()));
    }
    let model = load_model_file(&a.model)?;
    let n = model.n_features();
    let refs = ReferenceSet::new(read_points(&a.refs, n)?)?;
    let points = read_points(&a.points, n)?;
    let gig = GigConfig {
        corner_limit: a.corner_limit,
        ..Default::default()
    };
    let expectation = ExpectationConfig {
        target_stderr: a.target_stderr,
        shuffle_seed: a.seed,
        execution: Execution::Sequential,
        ..Default::default()
    };
    let reports = pathattr::exec::map_ordered(Execution::Parallel, &points, |i, x| {
        let sampling = SamplingConfig {
            seed: derive_seed(a.seed, i as u64),
            target_stderr: a.sample_stderr,
            max_permutations: a.max_permutations,
            ..Default::default()
        };
        match a.method {
            MethodArg::Gig => expected_attribution(|r, e| gig_attribute(&model, r, e, &gig), &refs, x, &expectation),
            MethodArg::ShapleyExact => {
                expected_attribution(|r, e| shapley_exact(&model, r, e), &refs, x, &expectation)
            }
            MethodArg::ShapleySampled => expected_attribution(
                |r, e| shapley_sampled(&model, r, e, &sampling).map(|(res, _)| res),
                &refs,
                x,
                &expectation,
            ),
        }
    });
    let reports = reports
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            r.map_err(|e| match CliError::from(e) {
                CliError::Input(m) => CliError::Input(format!("point {i}: {m}")),
                CliError::Compute(m) => CliError::Compute(format!("point {i}: {m}")),
            })
        })
        .collect::<Result<Vec<ConvergenceReport>, _>>()?;

    let bytes = match a.format {
        Format::Csv => attribution_csv(a.method, n, &reports),
        Format::Json => {
            let rows: Vec<_> = reports
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    json!({
                        "point_idx": i,
                        "method": a.method.as_str(),
                        "phi": r.mean_phi,
                        "stderr": r.stderr_phi,
                        "efficiency_residual": r.efficiency_residual,
                        "n_used": r.n_used,
                        "n_failed": r.n_failed,
                        "converged": r.converged,
                    })
                })
                .collect();
            let mut v = serde_json::to_vec_pretty(&rows).expect("rows serialize");
            v.push(b'\n');
            v
        }
    };
    write_atomic(&a.out, &bytes)?;
    write_manifest(
        &a.out,
        &json!({
            "format_version": FORMAT_VERSION,
            "command": "attribute",
            "model": a.model,
            "refs": a.refs,
            "points": a.points,
            "method": a.method.as_str(),
            "seeds": { "shuffle": a.seed, "sampling": a.seed },
            "tolerances": tolerances(),
            "target_stderr": a.target_stderr,
            "corner_limit": a.corner_limit,
            "max_permutations": a.max_permutations,
            "sample_stderr": a.sample_stderr,
        }),
    )
}

fn attribution_csv(method: MethodArg, n: usize, reports: &[ConvergenceReport]) -> Vec<u8> {
    let mut header = vec!["point_idx".to_string(), "method".to_string()];
    header.extend((1..=n).map(|i| format!("phi{i}")));
    header.extend((1..=n).map(|i| format!("stderr{i}")));
    header.extend(["efficiency_residual", "n_used", "converged"].map(String::from));
    let mut out = header.join(",");
    out.push('\n');
    for (i, r) in reports.iter().enumerate() {
        let mut row = vec![i.to_string(), method.as_str().to_string()];
        row.extend(r.mean_phi.iter().map(|&v| num(v)));
        match &r.stderr_phi {
            Some(s) => row.extend(s.iter().map(|&v| num(v))),
            None => row.extend(std::iter::repeat(String::new()).take(n)),
        }
        row.push(num(r.efficiency_residual));
        row.push(r.n_used.to_string());
        row.push(r.converged.to_string());
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out.into_bytes()
}

fn bounds_from(v: &[f64]) -> Bounds {
    Bounds {
        lo: [v[0], v[1]],
        hi: [v[2], v[3]],
    }
}

fn cmd_gen_data(a: &GenDataArgs) -> Result<(), CliError> {
    let GaussiansArg::Default = a.gaussians;
    let field = ToyFieldSpec::default();
    let bounds = bounds_from(&a.bounds);
    let mut data = gen_double_gaussian(&GaussianSpec::default_pair(), a.n, &field, derive_seed(a.seed, 0))?;
    data.extend(gen_uniform_background(a.background, &bounds, &field, derive_seed(a.seed, 1))?);
    write_atomic(&a.out, io::dataset_csv(&data).as_bytes())?;
    write_manifest(
        &a.out,
        &json!({
            "format_version": FORMAT_VERSION,
            "command": "gen-data",
            "seeds": { "master": a.seed, "gaussians": derive_seed(a.seed, 0), "background": derive_seed(a.seed, 1) },
            "tolerances": {},
            "gaussians": "default",
            "n_per_gaussian": a.n,
            "background": a.background,
            "bounds": a.bounds,
            "rows": data.len(),
        }),
    )
}

#[derive(Debug, Clone, Copy)]
struct MaxFeatures(Option<usize>);

fn parse_max_features(s: &str) -> Result<MaxFeatures, String> {
    if s == "all" {
        return Ok(MaxFeatures(None));
    }
    match s.parse::<usize>() {
        Ok(k) if k >= 1 => Ok(MaxFeatures(Some(k))),
        _ => Err(format!("expected a positive count or `all`, got `{s}`")),
    }
}

fn cmd_train(a: &TrainArgs) -> Result<(), CliError> {
    let data = read_dataset(&a.data)?;
    let cfg = TrainerConfig {
        n_trees: a.n_trees,
        max_depth: a.max_depth,
        min_samples_split: a.min_samples_split,
        n_candidate_features: a.max_features.0,
        seed: a.seed,
        execution: Execution::Parallel,
    };
    let model = Model::Trees(train_extra_trees(&data, &cfg)?);
    write_atomic(&a.out, &save_model(&model)?)?;
    write_manifest(
        &a.out,
        &json!({
            "format_version": FORMAT_VERSION,
            "command": "train",
            "data": a.data,
            "seeds": { "trainer": a.seed },
            "tolerances": {},
            "n_trees": a.n_trees,
            "max_depth": a.max_depth,
            "min_samples_split": a.min_samples_split,
            "max_features": a.max_features.0,
        }),
    )
}

fn cmd_experiment(a: &ExperimentArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let cfg = ExperimentConfig {
        background_counts: a.background.clone(),
        seeds: a.seed.clone(),
        data_seed: a.data_seed,
        trainer: TrainerConfig {
            n_trees: a.n_trees,
            ..Default::default()
        },
        target_stderr: a.target_stderr,
        gig: GigConfig {
            corner_limit: a.corner_limit,
            ..Default::default()
        },
        ..Default::default()
    };
    let rows = run_ratio_experiment(&cfg)?;
    let mut csv = String::from(EXPERIMENT_CSV_HEADER);
    csv.push('\n');
    for r in &rows {
        csv.push_str(&r.to_csv_line());
        csv.push('\n');
    }
    write_atomic(&a.out, csv.as_bytes())?;
    for s in summarize_ratios(&rows) {
        println!(
            "seed {} background {} {}: median ratio {:.3}, max ratio {:.3} ({} stable points)",
            s.seed,
            s.background_n,
            s.method.as_str(),
            s.median,
            s.max,
            s.n_stable
        );
    }
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        eprintln!("pathattr: {failed} rows recorded failures");
    }
    write_manifest(
        &a.out,
        &json!({
            "format_version": FORMAT_VERSION,
            "command": "experiment",
            "seeds": {
                "runs": a.seed,
                "data": a.data_seed,
                "derivation": "data streams 0 (gaussians) and 1 (background); trainer stream 2; reference order stream 3",
            },
            "tolerances": tolerances(),
            "background": a.background,
            "n_trees": a.n_trees,
            "n_per_gaussian": cfg.n_per_gaussian,
            "centerline_points": cfg.k,
            "centerline_band": cfg.band,
            "bounds": [cfg.bounds.lo, cfg.bounds.hi],
            "target_stderr": a.target_stderr,
            "corner_limit": a.corner_limit,
            "rows": rows.len(),
            "failed_rows": failed,
            "wall_time_seconds": start.elapsed().as_secs_f64(),
        }),
    )
}

fn cmd_bench(a: &BenchArgs) -> Result<(), CliError> {
    if a.trees.len() < 2 {
        return Err(CliError::Input("bench needs at least two tree counts".into()));
    }
    let rows = time_gig_scaling(&a.trees, a.features, a.pairs, a.repeats, a.seed)?;
    let mut csv = String::from("n_trees,attributions,seconds,attributions_per_second,normalized_growth\n");
    let mut worst = 0.0f64;
    for r in &rows {
        let g = normalized_growth(&rows[0], r);
        worst = worst.max(g);
        println!(
            "{:>6} trees: {:>12.1} attributions/s  (growth vs linear {:.3})",
            r.n_trees, r.per_second, g
        );
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            r.n_trees,
            r.n_attributions,
            num(r.seconds),
            num(r.per_second),
            num(g)
        ));
    }
    let pass = worst <= a.max_growth;
    println!(
        "scaling {}: worst normalized growth {worst:.3} (limit {})",
        if pass { "ok" } else { "FAILED" },
        a.max_growth
    );
    if let Some(out) = &a.out {
        write_atomic(out, csv.as_bytes())?;
        write_manifest(
            out,
            &json!({
                "format_version": FORMAT_VERSION,
                "command": "bench",
                "seeds": { "master": a.seed },
                "tolerances": { "max_growth": a.max_growth },
                "trees": a.trees,
                "features": a.features,
                "pairs": a.pairs,
                "repeats": a.repeats,
            }),
        )?;
    }
    if pass {
        Ok(())
    } else {
        Err(CliError::Compute(format!("scaling worse than {}x linear", a.max_growth)))
    }
}

fn cmd_model_info(a: &ModelInfoArgs) -> Result<(), CliError> {
    let model = load_model_file(&a.model)?;
    let mut info = vec![("n_features".to_string(), json!(model.n_features()))];
    match &model {
        Model::Trees(e) => {
            info.push(("kind".into(), json!("tree_ensemble")));
            info.push(("n_trees".into(), json!(e.trees().len())));
            info.push(("max_depth".into(), json!(e.trees().iter().map(|t| t.depth()).max())));
            info.push(("n_leaves".into(), json!(e.trees().iter().map(|t| t.n_leaves()).sum::<usize>())));
            info.push(("link".into(), json!(e.link())));
            info.push(("aggregation".into(), json!(e.aggregation())));
        }
        Model::Analytic(m) => {
            info.push(("kind".into(), json!("analytic")));
            let form = match m.form() {
                AnalyticForm::Linear { .. } => "linear",
                AnalyticForm::Separable { .. } => "separable",
                AnalyticForm::Bilinear { .. } => "bilinear",
                AnalyticForm::TanhField { .. } => "tanh_field",
                AnalyticForm::LinearCombination { .. } => "linear_combination",
                AnalyticForm::Reparametrized { .. } => "reparametrized",
            };
            info.push(("form".into(), json!(form)));
        }
    }
    match a.format {
        Format::Json => {
            let obj: serde_json::Map<String, serde_json::Value> = info.into_iter().collect();
            println!("{}", serde_json::to_string_pretty(&obj).expect("info serializes"));
        }
        Format::Csv => {
            println!("key,value");
            for (k, v) in info {
                println!("{k},{}", v.to_string().trim_matches('"'));
            }
        }
    }
    Ok(())
}
