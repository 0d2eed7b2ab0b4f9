//! Command-line front end. `granch <subcommand> --help` lists the flags.
//!
//! Exit codes: 0 success, 2 usage or parameter error, 3 invalid input,
//! 4 verification failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::ap::{expand_ap, GranchParams};
use crate::bounds::ApInit;
use crate::dump::{format_ap_dump, format_neighbors};
use crate::error::Error;
use crate::eval::{default_range, evaluate, holdout, HoldoutSplit, Method};
use crate::graph::{format_edge_list, load_edge_list, Graph};
use crate::knn::{knn_commute_all, KnnParams, QueryStatus};
use crate::simgen::{generate, inject_noise, random_connected, GenSpec, DEFAULT_LONG_RANGE};
use crate::verify::{run_suite, SuiteConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "granch", version, about = "Nearest neighbors under truncated commute time")]
pub struct Cli {
    /// Worker threads (defaults to available parallelism).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Treat edge lists as directed.
    #[arg(long, global = true)]
    directed: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a small-world graph with Euclidean growth rate d.
    Gen(GenArgs),
    /// Link one random hub to a fraction of the other nodes.
    Noise(NoiseArgs),
    /// Hold out a random fraction of edges.
    Split(SplitArgs),
    /// Build neighborhoods and answer the commute kNN query for every node.
    Knn(KnnArgs),
    /// Link-prediction AUC for one or more methods.
    Eval(EvalArgs),
    /// Check the bounds engine against the exact oracles.
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
struct OutArgs {
    /// Output directory, created if absent.
    #[arg(long, default_value = ".")]
    out: PathBuf,

    /// Overwrite existing output files.
    #[arg(long)]
    force: bool,
}

#[derive(Debug, Args)]
struct GranchArgs {
    /// Truncation horizon T.
    #[arg(short = 'T', long = "horizon", default_value_t = 6)]
    horizon: usize,

    /// Range threshold T' (default: 2.9, 5.95, 9.75 for T = 3, 6, 10).
    #[arg(long)]
    range: Option<f64>,

    /// Initialize neighborhoods with p-hop balls.
    #[arg(long = "ap-init", default_value_t = 1)]
    ap_init: usize,

    /// Boundary nodes expanded per step.
    #[arg(long, default_value_t = 1)]
    batch: usize,
}

impl GranchArgs {
    fn params(&self) -> GranchParams {
        let init = if self.ap_init <= 1 {
            ApInit::OneHop
        } else {
            ApInit::Hops(self.ap_init)
        };
        let range = self.range.unwrap_or_else(|| default_range(self.horizon));
        GranchParams::new(self.horizon, range)
            .with_init(init)
            .with_batch(self.batch)
    }
}

#[derive(Debug, Args)]
struct QueryArgs {
    #[arg(short, long, default_value_t = 10)]
    k: usize,

    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,

    /// Re-expansion rounds per query.
    #[arg(long = "max-rounds", default_value_t = 25)]
    max_rounds: usize,
}

impl QueryArgs {
    fn params(&self) -> KnnParams {
        KnnParams {
            k: self.k,
            epsilon: self.epsilon,
            max_rounds: self.max_rounds,
        }
    }
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(short, long)]
    n: usize,
    /// Growth rate (embedding dimension).
    #[arg(short, long, default_value_t = 2)]
    d: usize,
    /// Edge count.
    #[arg(short, long)]
    e: usize,
    #[arg(long = "long-range", default_value_t = DEFAULT_LONG_RANGE)]
    long_range: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args)]
struct NoiseArgs {
    #[arg(short, long)]
    graph: PathBuf,
    #[arg(long, default_value_t = 0.2)]
    fraction: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args)]
struct SplitArgs {
    #[arg(short, long)]
    graph: PathBuf,
    #[arg(long, default_value_t = 0.3)]
    holdout: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args)]
struct KnnArgs {
    #[arg(short, long)]
    graph: PathBuf,
    #[command(flatten)]
    granch: GranchArgs,
    #[command(flatten)]
    query: QueryArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Original graph; candidates are drawn from its 4-hop balls.
    #[arg(short, long)]
    graph: PathBuf,
    /// Training graph from `split` (requires --held).
    #[arg(long, requires = "held")]
    train: Option<PathBuf>,
    /// Held-out edges from `split` (requires --train).
    #[arg(long, requires = "train")]
    held: Option<PathBuf>,
    /// Hold out this fraction here instead of reading a split.
    #[arg(long, conflicts_with = "train")]
    holdout: Option<f64>,
    /// Add hub noise to the original graph before splitting.
    #[arg(long, conflicts_with = "train")]
    noise: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// `all` or a comma list of granch, baseline, exact.
    #[arg(long, default_value = "all")]
    method: String,
    /// Run the commute query for every evaluated node before scoring.
    #[arg(long)]
    refine: bool,
    #[command(flatten)]
    granch: GranchArgs,
    #[command(flatten)]
    query: QueryArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args)]
struct OracleArgs {
    /// Graph to check; a random connected graph is generated when omitted.
    #[arg(short, long)]
    graph: Option<PathBuf>,
    /// Nodes of the generated graph.
    #[arg(short, long, default_value_t = 50)]
    n: usize,
    /// Edges beyond the spanning tree of the generated graph.
    #[arg(long, default_value_t = 50)]
    extra: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest graph the dense oracles accept.
    #[arg(long, default_value_t = crate::oracle::DENSE_CAP)]
    cap: usize,
    #[command(flatten)]
    granch: GranchArgs,
    #[command(flatten)]
    query: QueryArgs,
    #[command(flatten)]
    out: OutArgs,
}

/// Failure of a subcommand together with its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    msg: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Spec(_) => EXIT_USAGE,
            _ => EXIT_INPUT,
        };
        Failure {
            code,
            msg: e.to_string(),
        }
    }
}

type Outcome = std::result::Result<(), Failure>;

/// Writes files into the output directory, refusing to clobber without
/// `--force`.
struct Output {
    dir: PathBuf,
    force: bool,
}

impl Output {
    /// Creates the directory and checks up front that none of `names` would
    /// be overwritten without `--force`.
    fn new(args: &OutArgs, names: &[&str]) -> std::result::Result<Self, Failure> {
        std::fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
        let out = Output {
            dir: args.out.clone(),
            force: args.force,
        };
        for name in names {
            out.check(name)?;
        }
        Ok(out)
    }

    fn check(&self, name: &str) -> Outcome {
        let path = self.path(name);
        if path.exists() && !self.force {
            return Err(Failure {
                code: EXIT_USAGE,
                msg: format!("{} exists; pass --force to overwrite", path.display()),
            });
        }
        Ok(())
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn write(&self, name: &str, contents: &str) -> Outcome {
        self.check(name)?;
        let path = self.path(name);
        std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        Ok(())
    }
}

/// Flat `key=value` run summary.
#[derive(Default)]
struct Stats(String);

impl Stats {
    fn put(&mut self, key: &str, value: impl std::fmt::Display) {
        let _ = writeln!(self.0, "{key}={value}");
    }
}

fn load(path: &Path, directed: bool) -> std::result::Result<Graph, Failure> {
    Ok(load_edge_list(path, directed)?)
}

fn held_graph(n: usize, held: &[(usize, usize)], directed: bool) -> std::result::Result<Graph, Failure> {
    let edges: Vec<_> = held.iter().map(|&(a, b)| (a, b, 1.0)).collect();
    Ok(Graph::from_edges(n, directed, &edges)?)
}

fn cmd_gen(a: &GenArgs) -> Outcome {
    let out = Output::new(&a.out, &["graph.txt", "coords.txt", "gen_stats.txt"])?;
    let spec = GenSpec::new(a.n, a.d, a.e, a.seed).with_long_range(a.long_range);
    let gen = generate(&spec)?;
    out.write("graph.txt", &format_edge_list(&gen.graph))?;
    out.write("coords.txt", &gen.format_coords())?;
    let mut st = Stats::default();
    st.put("n", gen.graph.node_count());
    st.put("e", gen.graph.edge_count());
    st.put("d", a.d);
    st.put("long_range", a.long_range);
    st.put("seed", a.seed);
    out.write("gen_stats.txt", &st.0)?;
    println!("n={} e={}", gen.graph.node_count(), gen.graph.edge_count());
    Ok(())
}

fn cmd_noise(a: &NoiseArgs, directed: bool) -> Outcome {
    let g = load(&a.graph, directed)?;
    let out = Output::new(&a.out, &["noisy.txt", "noise_stats.txt"])?;
    let (noisy, report) = inject_noise(&g, a.fraction, a.seed)?;
    out.write("noisy.txt", &format_edge_list(&noisy))?;
    let mut st = Stats::default();
    st.put("hub", report.hub);
    st.put("added", report.added.len());
    st.put("e", noisy.edge_count());
    st.put("seed", a.seed);
    out.write("noise_stats.txt", &st.0)?;
    println!("hub={} added={}", report.hub, report.added.len());
    Ok(())
}

fn cmd_split(a: &SplitArgs, directed: bool) -> Outcome {
    let g = load(&a.graph, directed)?;
    let out = Output::new(&a.out, &["train.txt", "held.txt", "split_stats.txt"])?;
    let split = holdout(&g, a.holdout, a.seed)?;
    out.write("train.txt", &format_edge_list(&split.train))?;
    let held = held_graph(g.node_count(), &split.held, directed)?;
    out.write("held.txt", &format_edge_list(&held))?;
    let mut st = Stats::default();
    st.put("train_edges", split.train.edge_count());
    st.put("held_edges", split.held.len());
    st.put("fraction", a.holdout);
    st.put("seed", a.seed);
    out.write("split_stats.txt", &st.0)?;
    println!("train={} held={}", split.train.edge_count(), split.held.len());
    Ok(())
}

fn cmd_knn(a: &KnnArgs, directed: bool) -> Outcome {
    let params = a.granch.params();
    params.validate()?;
    let kp = a.query.params();
    kp.validate()?;
    let g = load(&a.graph, directed)?;
    let out = Output::new(&a.out, &["neighbors.tsv", "ap_dump.txt", "knn_stats.txt"])?;

    let t0 = Instant::now();
    let mut index = expand_ap(&g, &params)?;
    let build = t0.elapsed();
    let built_pairs = index.pair_count();
    let t1 = Instant::now();
    let results = knn_commute_all(&g, &mut index, &kp)?;
    let query = t1.elapsed();

    out.write("neighbors.tsv", &format_neighbors(&results))?;
    out.write("ap_dump.txt", &format_ap_dump(&index))?;
    let undecided_queries = results
        .iter()
        .filter(|r| r.status == QueryStatus::Undecided)
        .count();
    let undecided_pairs: usize = results.iter().map(|r| r.undecided.len()).sum();
    let mut st = Stats::default();
    st.put("n", g.node_count());
    st.put("e", g.edge_count());
    st.put("T", params.horizon);
    st.put("T_prime", params.range);
    st.put("k", kp.k);
    st.put("epsilon", kp.epsilon);
    st.put("ap_pairs_built", built_pairs);
    st.put("ap_pairs", index.pair_count());
    st.put("unresolved_destinations", index.unresolved().len());
    st.put("undecided_queries", undecided_queries);
    st.put("undecided_pairs", undecided_pairs);
    st.put("seconds_build", format!("{:.6}", build.as_secs_f64()));
    st.put("seconds_query", format!("{:.6}", query.as_secs_f64()));
    out.write("knn_stats.txt", &st.0)?;
    println!(
        "ap_pairs={} undecided_queries={undecided_queries}",
        index.pair_count()
    );
    Ok(())
}

fn parse_methods(spec: &str, a: &EvalArgs) -> std::result::Result<Vec<Method>, Failure> {
    let params = a.granch.params();
    params.validate()?;
    let knn = if a.refine {
        let kp = a.query.params();
        kp.validate()?;
        Some(kp)
    } else {
        None
    };
    let names: Vec<&str> = if spec == "all" {
        vec!["granch", "exact", "baseline"]
    } else {
        spec.split(',').map(str::trim).collect()
    };
    names
        .into_iter()
        .map(|m| match m {
            "granch" => Ok(Method::Granch {
                params: params.clone(),
                knn,
            }),
            "baseline" => Ok(Method::Baseline),
            "exact" => Ok(Method::Exact {
                horizon: params.horizon,
            }),
            other => Err(Failure {
                code: EXIT_USAGE,
                msg: format!("unknown method '{other}' (expected granch, baseline, exact or all)"),
            }),
        })
        .collect()
}

fn cmd_eval(a: &EvalArgs, directed: bool) -> Outcome {
    let methods = parse_methods(&a.method, a)?;
    let mut original = load(&a.graph, directed)?;
    let mut st = Stats::default();
    let split = match (&a.train, &a.held) {
        (Some(train), Some(held)) => {
            let train = load(train, directed)?;
            let held = load(held, directed)?;
            if train.node_count() != original.node_count() || held.node_count() != original.node_count() {
                return Err(Error::Validation("graph, train and held node counts differ".into()).into());
            }
            HoldoutSplit {
                train,
                held: held.edges().into_iter().map(|(a, b, _)| (a, b)).collect(),
                fraction: f64::NAN,
                seed: a.seed,
            }
        }
        _ => {
            if let Some(f) = a.noise {
                let (noisy, report) = inject_noise(&original, f, a.seed)?;
                st.put("noise_hub", report.hub);
                st.put("noise_added", report.added.len());
                original = noisy;
            }
            holdout(&original, a.holdout.unwrap_or(0.3), a.seed)?
        }
    };
    let mut names: Vec<String> = methods.iter().map(|m| format!("eval_{}.tsv", m.name())).collect();
    names.push("eval_stats.txt".into());
    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    let out = Output::new(&a.out, &names)?;
    st.put("n", original.node_count());
    st.put("train_edges", split.train.edge_count());
    st.put("held_edges", split.held.len());
    for m in &methods {
        let report = evaluate(&split, &original, m)?;
        out.write(&format!("eval_{}.tsv", report.method), &report.to_tsv())?;
        for (key, value) in report.summary().lines().filter_map(|l| l.split_once('=')) {
            if key != "method" {
                st.put(&format!("{}.{key}", report.method), value);
            }
        }
        println!(
            "{}\tmean_auc={:.4}\tevaluated={}\tskipped={}\tpairs={}",
            report.method,
            report.mean_auc,
            report.evaluated(),
            report.skipped,
            report.pair_count
        );
    }
    out.write("eval_stats.txt", &st.0)?;
    Ok(())
}

fn cmd_oracle(a: &OracleArgs, directed: bool) -> Outcome {
    let params = a.granch.params();
    params.validate()?;
    let kp = a.query.params();
    kp.validate()?;
    let g = match &a.graph {
        Some(p) => load(p, directed)?,
        None => random_connected(a.n, a.extra, true, a.seed)?,
    };
    if g.node_count() > a.cap {
        return Err(Failure {
            code: EXIT_INPUT,
            msg: format!(
                "graph has {} nodes, above the oracle cap of {}; refusing",
                g.node_count(),
                a.cap
            ),
        });
    }
    let out = Output::new(&a.out, &["oracle_stats.txt"])?;
    let cfg = SuiteConfig {
        params,
        knn: kp,
        cap: a.cap,
    };
    let families = run_suite(&g, &cfg)?;
    let mut st = Stats::default();
    st.put("n", g.node_count());
    let mut all = true;
    for f in &families {
        println!("{f}");
        st.put(&format!("{}.pass", f.name), f.passed());
        st.put(&format!("{}.checks", f.name), f.checks);
        st.put(&format!("{}.max_violation", f.name), f.max_violation);
        all &= f.passed();
    }
    st.put("pass", all);
    out.write("oracle_stats.txt", &st.0)?;
    if all {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_VERIFY,
            msg: "verification failed".into(),
        })
    }
}

fn dispatch(cli: &Cli) -> Outcome {
    let d = cli.directed;
    match &cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Noise(a) => cmd_noise(a, d),
        Command::Split(a) => cmd_split(a, d),
        Command::Knn(a) => cmd_knn(a, d),
        Command::Eval(a) => cmd_eval(a, d),
        Command::Oracle(a) => cmd_oracle(a, d),
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cli.workers {
        if w == 0 {
            eprintln!("error: --workers must be >= 1");
            return EXIT_USAGE;
        }
        pool = pool.num_threads(w);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    match pool.install(|| dispatch(&cli)) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            f.code
        }
    }
}
