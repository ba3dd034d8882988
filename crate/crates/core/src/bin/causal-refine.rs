//! `causal-refine`: simulate, discover, fit, refine, evaluate, export-dot.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use causal_refine::ci::{CiConfig, Statistic};
use causal_refine::cpt::{fit_cpts, CptSet};
use causal_refine::eval::{
    evaluate_refinement, learn_model, run_benchmark, single_run_report, BenchmarkReport,
    ExperimentConfig,
};
use causal_refine::io;
use causal_refine::pc::{discover, PcConfig, TierKnowledge};
use causal_refine::refine::{NeighborMode, RefineConfig, Refiner, Schedule};
use causal_refine::synth::{generate, SyntheticSpec};
use causal_refine::{CausalGraph, Error, LabelSchema, Result};

const THREADS_ENV: &str = "CAUSAL_REFINE_THREADS";

#[derive(Parser, Debug)]
#[command(
    name = "causal-refine",
    version,
    about = "Tiered causal discovery and belief refinement over binary labels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic benchmark: truth graph and CPTs, tiers, train/test data, base beliefs.
    Simulate(SimulateArgs),
    /// Learn a tier-constrained causal graph from a binary dataset.
    Discover(DiscoverArgs),
    /// Fit conditional probability tables for a graph.
    Fit(FitArgs),
    /// Refine belief vectors over a graph and its CPTs.
    Refine(RefineArgs),
    /// Score refinement curves, on files or on freshly simulated benchmarks.
    Evaluate(Box<EvaluateArgs>),
    /// Convert a graph JSON file to DOT.
    ExportDot(ExportDotArgs),
}

#[derive(Args, Debug, Clone)]
struct SpecArgs {
    /// Number of Cause, Reason and Symptom labels.
    #[arg(long, value_parser = parse_tier_sizes, default_value = "3,4,6")]
    tier_sizes: (usize, usize, usize),
    #[arg(long, default_value_t = 2)]
    max_in_degree: usize,
    /// Probability that each candidate parent is drawn.
    #[arg(long, default_value_t = 0.5)]
    edge_prob: f64,
    /// Conditionals are drawn outside [0.5 - strength, 0.5 + strength].
    #[arg(long, default_value_t = 0.35)]
    cpt_strength: f64,
    #[arg(long, default_value_t = 2000)]
    n_train: usize,
    #[arg(long, default_value_t = 200)]
    n_test: usize,
    /// Probability that a base belief reports the wrong label value.
    #[arg(long, default_value_t = 0.2)]
    flip_rate: f64,
    /// Standard deviation of the Gaussian noise added to base beliefs.
    #[arg(long, default_value_t = 0.05)]
    jitter: f64,
    /// Permit Cause -> Symptom edges (generated and learned).
    #[arg(long)]
    allow_tier_skip: bool,
}

impl SpecArgs {
    fn spec(&self, seed: u64) -> SyntheticSpec {
        SyntheticSpec {
            tier_sizes: self.tier_sizes,
            max_in_degree: self.max_in_degree,
            edge_prob: self.edge_prob,
            cpt_strength: self.cpt_strength,
            n_train: self.n_train,
            n_test: self.n_test,
            flip_rate: self.flip_rate,
            jitter: self.jitter,
            allow_tier_skip: self.allow_tier_skip,
            seed,
        }
    }
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    spec: SpecArgs,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Debug, Clone)]
struct PcArgs {
    /// Significance level of the independence tests.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Largest conditioning set size.
    #[arg(long, default_value_t = 3)]
    max_cond: usize,
    /// Tests with fewer than this many rows per degree of freedom count as independent.
    #[arg(long, default_value_t = 10.0)]
    min_samples_per_dof: f64,
    /// Use Pearson's chi-squared statistic instead of G².
    #[arg(long)]
    pearson: bool,
}

impl PcArgs {
    fn config(&self, strict: bool) -> PcConfig {
        PcConfig {
            ci: CiConfig {
                alpha: self.alpha,
                min_samples_per_dof: self.min_samples_per_dof,
                statistic: if self.pearson {
                    Statistic::PearsonChiSquared
                } else {
                    Statistic::GSquared
                },
            },
            max_cond: self.max_cond,
            strict,
        }
    }

    fn validate(&self) -> Result<()> {
        self.config(false).ci.validate()?;
        if self.max_cond > causal_refine::ci::MAX_CONDITIONING {
            return Err(Error::InvalidArgument(format!(
                "max-cond must be at most {}, got {}",
                causal_refine::ci::MAX_CONDITIONING,
                self.max_cond
            )));
        }
        Ok(())
    }
}

#[derive(Args, Debug)]
struct DiscoverArgs {
    /// Binary CSV dataset with a header row of label names.
    #[arg(long)]
    data: PathBuf,
    /// JSON object mapping each label to its tier ("C", "R" or "S").
    #[arg(long)]
    tiers: PathBuf,
    #[command(flatten)]
    pc: PcArgs,
    /// Allow Cause -> Symptom edges.
    #[arg(long)]
    allow_tier_skip: bool,
    /// Fail with NotFullyOriented unless every edge gets a direction.
    #[arg(long)]
    strict: bool,
    /// Ignore the tiers during discovery (the result may be a partially directed pattern).
    #[arg(long)]
    no_tier_constraints: bool,
    /// Graph JSON output; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the graph as DOT.
    #[arg(long)]
    dot: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FitArgs {
    #[arg(long)]
    data: PathBuf,
    /// Graph JSON; its labels define the expected CSV header.
    #[arg(long)]
    graph: PathBuf,
    /// Pseudo-count added to each cell.
    #[arg(long, default_value_t = 1.0)]
    smoothing: f64,
    /// CPT JSON output; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct RefineOptions {
    /// Update rate.
    #[arg(long, default_value_t = 0.01)]
    epsilon: f64,
    /// Number of iterations.
    #[arg(long, default_value_t = 20)]
    tau: usize,
    /// Only parents send messages to their children.
    #[arg(long)]
    children_only: bool,
    /// Read every message from the previous iteration's beliefs.
    #[arg(long)]
    jacobi: bool,
}

impl RefineOptions {
    fn config(&self, epsilon: f64) -> RefineConfig {
        RefineConfig {
            epsilon,
            tau: self.tau,
            sweep_order: None,
            neighbors: if self.children_only {
                NeighborMode::ChildrenOnly
            } else {
                NeighborMode::ParentsAndChildren
            },
            schedule: if self.jacobi {
                Schedule::Jacobi
            } else {
                Schedule::Sequential
            },
        }
    }
}

#[derive(Args, Debug)]
struct RefineArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    cpts: PathBuf,
    /// CSV of base beliefs, one row per instance.
    #[arg(long)]
    beliefs: PathBuf,
    #[command(flatten)]
    options: RefineOptions,
    /// Final beliefs CSV; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Long-format CSV of every iteration (instance, iteration, label, belief).
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    /// Graph JSON (file mode, with --cpts).
    #[arg(long, requires = "cpts", conflicts_with_all = ["train", "synthetic"])]
    graph: Option<PathBuf>,
    /// CPT JSON (file mode, with --graph).
    #[arg(long, requires = "graph")]
    cpts: Option<PathBuf>,
    /// Training CSV to learn the graph and CPTs from (file mode, with --tiers).
    #[arg(long, requires = "tiers", conflicts_with = "synthetic")]
    train: Option<PathBuf>,
    #[arg(long)]
    tiers: Option<PathBuf>,
    /// Base beliefs CSV (file mode).
    #[arg(long, required_unless_present = "synthetic")]
    beliefs: Option<PathBuf>,
    /// True labels CSV matching the beliefs row by row (file mode).
    #[arg(long, required_unless_present = "synthetic")]
    truth: Option<PathBuf>,
    /// Simulate benchmarks instead of reading files.
    #[arg(long, conflicts_with_all = ["beliefs", "truth", "tiers"])]
    synthetic: bool,
    /// Number of synthetic seeds, starting at --seed.
    #[arg(long, default_value_t = 5)]
    seeds: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    spec: SpecArgs,
    #[command(flatten)]
    pc: PcArgs,
    #[arg(long, default_value_t = 1.0)]
    smoothing: f64,
    /// Update rates; repeat the flag or separate with commas for several curve families.
    #[arg(long = "epsilon", value_delimiter = ',', default_values_t = [0.01])]
    epsilons: Vec<f64>,
    #[arg(long, default_value_t = 20)]
    tau: usize,
    #[arg(long)]
    children_only: bool,
    #[arg(long)]
    jacobi: bool,
    /// Mean-shift bandwidth used to choose how many labels to emit.
    #[arg(long, default_value_t = 0.1)]
    bandwidth: f64,
    /// Report JSON output; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Curve CSV (epsilon, seed, iteration, mean_f1).
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExportDotArgs {
    #[arg(long)]
    graph: PathBuf,
    /// DOT output; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_tier_sizes(s: &str) -> std::result::Result<(usize, usize, usize), String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [c, r, s] = parts.as_slice() else {
        return Err(format!("expected three comma-separated counts, got `{s}`"));
    };
    let num = |v: &str| {
        v.parse::<usize>()
            .map_err(|_| format!("`{v}` is not a count"))
    };
    Ok((num(c)?, num(r)?, num(s)?))
}

fn check_smoothing(s: f64) -> Result<()> {
    if s >= 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "smoothing must be non-negative, got {s}"
        )))
    }
}

fn check_bandwidth(b: f64) -> Result<()> {
    if b > 0.0 && b.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "bandwidth must be positive, got {b}"
        )))
    }
}

fn emit(path: Option<&Path>, contents: &str) -> Result<()> {
    match path {
        Some(p) => io::write_file(p, contents),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(contents.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Error::Io {
                    path: PathBuf::from("<stdout>"),
                    source: e,
                })
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load_graph(path: &Path) -> Result<CausalGraph> {
    CausalGraph::from_json(&read_text(path)?)
}

fn load_cpts(path: &Path, schema: Arc<LabelSchema>) -> Result<CptSet> {
    CptSet::from_json(&read_text(path)?, schema)
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let spec = args.spec.spec(args.seed);
    spec.validate()?;
    let data = generate(&spec)?;
    let out = &args.out;
    std::fs::create_dir_all(out).map_err(|source| Error::Io {
        path: out.clone(),
        source,
    })?;
    let schema = data.train.schema();
    io::write_file(&out.join("truth_graph.json"), &data.truth_graph.to_json())?;
    io::write_file(&out.join("truth_cpts.json"), &data.truth_cpts.to_json())?;
    io::save_tiers(&out.join("tiers.json"), schema)?;
    io::save_dataset(&out.join("train.csv"), &data.train)?;
    io::save_dataset(&out.join("test.csv"), &data.test)?;
    io::save_beliefs(&out.join("beliefs.csv"), schema, &data.base_beliefs)?;
    println!("seed {}", args.seed);
    Ok(())
}

fn discover_cmd(args: DiscoverArgs) -> Result<()> {
    args.pc.validate()?;
    let data = io::load_dataset(&args.data, &args.tiers)?;
    let knowledge = if args.no_tier_constraints {
        TierKnowledge::unconstrained(data.schema().clone())
    } else {
        TierKnowledge::tiered(data.schema().clone(), args.allow_tier_skip)
    };
    let found = discover(&data, &knowledge, &args.pc.config(args.strict))?;
    if let Some(dot) = &args.dot {
        io::write_file(dot, &found.graph.to_dot())?;
    }
    emit(args.out.as_deref(), &found.graph.to_json())
}

fn fit(args: FitArgs) -> Result<()> {
    check_smoothing(args.smoothing)?;
    let graph = load_graph(&args.graph)?;
    let data = io::load_dataset_with_schema(&args.data, graph.schema().clone())?;
    let cpts = fit_cpts(&data, &graph, args.smoothing)?;
    emit(args.out.as_deref(), &cpts.to_json())
}

fn refine_cmd(args: RefineArgs) -> Result<()> {
    let config = args.options.config(args.options.epsilon);
    config.validate()?;
    let graph = load_graph(&args.graph)?;
    let schema = graph.schema().clone();
    let cpts = load_cpts(&args.cpts, schema.clone())?;
    let beliefs = io::load_beliefs(&args.beliefs, schema.clone())?;
    let traces = Refiner::new(&graph, &cpts, config)?.run_batch(&beliefs)?;
    if let Some(path) = &args.trace {
        let mut csv = String::from("instance,iteration,label,belief\n");
        for (i, trace) in traces.iter().enumerate() {
            for (t, b) in trace.iterations().iter().enumerate() {
                for (k, v) in b.values().iter().enumerate() {
                    let _ = writeln!(csv, "{i},{t},{},{v}", schema.name(k));
                }
            }
        }
        io::write_file(path, &csv)?;
    }
    let last: Vec<_> = traces.iter().map(|t| t.last().clone()).collect();
    emit(args.out.as_deref(), &io::beliefs_to_csv(&schema, &last))
}

fn evaluate(args: EvaluateArgs) -> Result<()> {
    args.pc.validate()?;
    check_smoothing(args.smoothing)?;
    check_bandwidth(args.bandwidth)?;
    let options = RefineOptions {
        epsilon: 0.0,
        tau: args.tau,
        children_only: args.children_only,
        jacobi: args.jacobi,
    };
    for &e in &args.epsilons {
        options.config(e).validate()?;
    }
    let config = ExperimentConfig {
        pc: args.pc.config(false),
        allow_tier_skip: args.spec.allow_tier_skip,
        smoothing: args.smoothing,
        refine: options.config(args.epsilons[0]),
        bandwidth: args.bandwidth,
    };

    let report: BenchmarkReport = if args.synthetic {
        if args.seeds == 0 {
            return Err(Error::InvalidArgument("seeds must be at least 1".into()));
        }
        let spec = args.spec.spec(args.seed);
        spec.validate()?;
        let seeds: Vec<u64> = (0..args.seeds).map(|k| args.seed.wrapping_add(k)).collect();
        run_benchmark(&spec, &seeds, &args.epsilons, &config)?
    } else {
        let (graph, cpts) = match (&args.graph, &args.cpts, &args.train, &args.tiers) {
            (Some(g), Some(c), _, _) => {
                let graph = load_graph(g)?;
                let cpts = load_cpts(c, graph.schema().clone())?;
                (graph, cpts)
            }
            (None, None, Some(train), Some(tiers)) => {
                let model = learn_model(&io::load_dataset(train, tiers)?, &config)?;
                (model.graph, model.cpts)
            }
            _ => {
                return Err(Error::InvalidArgument(
                    "file mode needs --graph and --cpts, or --train and --tiers".into(),
                ))
            }
        };
        let schema = graph.schema().clone();
        let beliefs = io::load_beliefs(
            args.beliefs.as_deref().expect("required by clap"),
            schema.clone(),
        )?;
        let truth =
            io::load_dataset_with_schema(args.truth.as_deref().expect("required by clap"), schema)?;
        let reports = args
            .epsilons
            .iter()
            .map(|&e| {
                evaluate_refinement(
                    &graph,
                    &cpts,
                    &beliefs,
                    &truth,
                    &options.config(e),
                    args.bandwidth,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        single_run_report(reports, args.seed)
    };
    if let Some(path) = &args.csv {
        io::write_file(path, &report.curves_csv())?;
    }
    emit(args.out.as_deref(), &report.to_json())
}

fn export_dot(args: ExportDotArgs) -> Result<()> {
    emit(args.out.as_deref(), &load_graph(&args.graph)?.to_dot())
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| {
        Error::InvalidArgument(format!(
            "{THREADS_ENV} must be a non-negative integer, got `{raw}`"
        ))
    })?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidArgument(format!("cannot configure {n} threads: {e}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Discover(a) => discover_cmd(a),
        Command::Fit(a) => fit(a),
        Command::Refine(a) => refine_cmd(a),
        Command::Evaluate(a) => evaluate(*a),
        Command::ExportDot(a) => export_dot(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format(|buf, record| {
            writeln!(
                buf,
                "{}: {}",
                record.level().as_str().to_lowercase(),
                record.args()
            )
        })
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.name());
            ExitCode::FAILURE
        }
    }
}
