use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use sha2::{Digest, Sha256};
use walklab::generators::{generate, GenSpec};
use walklab::graph::load_edge_list;
use walklab::kernel::{build_edge_kernel, build_wedge_kernel, dump_kernel};
use walklab::recurrence::{growth_csv, recurrence_proxy_experiment, Family};
use walklab::report::{analyze, AnalyzeOptions};
use walklab::simulate::walk;
use walklab::stationary::Method;
use walklab::{DirectedEdge, Graph, Params};

#[derive(Parser)]
#[command(name = "walklab", version, about = "Second-order random walks on graphs: kernels, stationary measures and verifiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a named graph as an edge list.
    Gen(GenArgs),
    /// Build the kernels, solve for stationary measures and run every verifier.
    Analyze(AnalyzeArgs),
    /// Sample a trajectory and write a JSON header followed by the node trace.
    Simulate(SimulateArgs),
    /// Resistance growth table for a patch family, as CSV.
    Recurrence(RecurrenceArgs),
    /// Dump a kernel with its per-edge denominators as JSON.
    Kernel(KernelArgs),
}

#[derive(Args)]
struct WeightArgs {
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
}

impl WeightArgs {
    fn params(&self) -> Result<Params> {
        Ok(Params::new(self.alpha, self.beta, self.gamma)?)
    }
}

#[derive(Args)]
struct GenArgs {
    /// One of the generator names, e.g. clique4-minus-edge or tri-torus.
    kind: String,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long)]
    cols: Option<usize>,
    #[arg(long)]
    radius: Option<usize>,
    /// Circulant offsets, comma separated.
    #[arg(long, value_delimiter = ',')]
    offsets: Vec<usize>,
    /// Edge probability for erdos-renyi.
    #[arg(long)]
    p: Option<f64>,
    /// Chord endpoints for cycle-chord, as `a,b`.
    #[arg(long, value_parser = parse_pair)]
    chord: Option<(usize, usize)>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Direct,
    Power,
}

#[derive(Args)]
struct AnalyzeArgs {
    graph: PathBuf,
    #[command(flatten)]
    weights: WeightArgs,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = MethodArg::Direct)]
    method: MethodArg,
    #[arg(long, default_value_t = 8)]
    max_cycle_len: usize,
    /// Also build the collapsed chain used by the recurrence comparison.
    #[arg(long)]
    recurrence_lab: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    graph: PathBuf,
    #[command(flatten)]
    weights: WeightArgs,
    #[arg(long, default_value_t = 1000)]
    steps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Start edge as `u,v` in node labels; defaults to the first directed edge.
    #[arg(long, value_parser = parse_label_pair)]
    start: Option<(u64, u64)>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RecurrenceArgs {
    /// triangular or tree3.
    #[arg(long)]
    family: Family,
    /// Radii as `a..b` (inclusive) or a comma separated list.
    #[arg(long, default_value = "2..6", value_parser = parse_radii)]
    radii: Radii,
    #[command(flatten)]
    weights: WeightArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SpaceArg {
    Edge,
    Wedge,
}

#[derive(Args)]
struct KernelArgs {
    graph: PathBuf,
    #[command(flatten)]
    weights: WeightArgs,
    #[arg(long, value_enum, default_value_t = SpaceArg::Edge)]
    space: SpaceArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Debug)]
struct Radii(Vec<usize>);

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected a,b, got {s:?}"))?;
    Ok((a.trim().parse().map_err(|e| format!("{e}"))?, b.trim().parse().map_err(|e| format!("{e}"))?))
}

fn parse_label_pair(s: &str) -> Result<(u64, u64), String> {
    let (a, b) = parse_pair(s)?;
    Ok((a as u64, b as u64))
}

fn parse_radii(s: &str) -> Result<Radii, String> {
    let radii: Vec<usize> = if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().map_err(|e| format!("{e}"))?;
        let b: usize = b.trim().trim_start_matches('=').parse().map_err(|e| format!("{e}"))?;
        (a..=b).collect()
    } else {
        s.split(',').map(|x| x.trim().parse().map_err(|e| format!("{e}"))).collect::<Result<_, _>>()?
    };
    if radii.is_empty() {
        return Err("empty radius range".into());
    }
    Ok(Radii(radii))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_graph(path: &Path) -> Result<Graph> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    load_edge_list(&text).with_context(|| format!("parsing {}", path.display()))
}

fn cmd_gen(args: &GenArgs) -> Result<ExitCode> {
    let spec = GenSpec {
        n: args.n,
        m: args.m,
        rows: args.rows,
        cols: args.cols,
        radius: args.radius,
        offsets: args.offsets.clone(),
        prob: args.p,
        chord: args.chord,
        seed: args.seed,
    };
    let g = generate(&args.kind, &spec)?;
    emit(args.out.as_deref(), &g.to_edge_list())?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_analyze(args: &AnalyzeArgs) -> Result<ExitCode> {
    let g = load_graph(&args.graph)?;
    let p = args.weights.params()?;
    let opts = AnalyzeOptions {
        tol: args.tol,
        method: match args.method {
            MethodArg::Direct => Method::Direct,
            MethodArg::Power => Method::Power,
        },
        max_cycle_len: args.max_cycle_len,
        recurrence_lab: args.recurrence_lab,
        ..AnalyzeOptions::default()
    };
    let report = analyze(&g, &p, &opts)?;
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    emit(args.out.as_deref(), &text)?;
    for v in &report.violations {
        log::warn!("violation: {v}");
    }
    Ok(if report.ok() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_simulate(args: &SimulateArgs) -> Result<ExitCode> {
    let g = load_graph(&args.graph)?;
    let p = args.weights.params()?;
    let id = |label: u64| {
        g.labels().iter().position(|&l| l == label).with_context(|| format!("no node labelled {label}"))
    };
    let start = match args.start {
        Some((u, v)) => DirectedEdge::new(id(u)?, id(v)?),
        None => g.directed_edges()[0],
    };
    log::info!("simulate: seed {} steps {} start ({},{})", args.seed, args.steps, g.label(start.tail), g.label(start.head));
    let tr = walk(&g, &p, start, args.steps, args.seed)?;
    let mut trace = String::with_capacity(tr.nodes.len() * 4);
    for &v in &tr.nodes {
        writeln!(trace, "{}", g.label(v))?;
    }
    let digest: String = Sha256::digest(trace.as_bytes()).iter().map(|b| format!("{b:02x}")).collect();
    let header = json!({
        "seed": tr.seed,
        "params": tr.params,
        "start": [g.label(start.tail), g.label(start.head)],
        "steps": tr.steps(),
        "sha256": digest,
    });
    emit(args.out.as_deref(), &format!("{header}\n{trace}"))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_recurrence(args: &RecurrenceArgs) -> Result<ExitCode> {
    let p = args.weights.params()?;
    let rows = recurrence_proxy_experiment(args.family, &args.radii.0, &p)?;
    emit(args.out.as_deref(), &growth_csv(&rows))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_kernel(args: &KernelArgs) -> Result<ExitCode> {
    let g = load_graph(&args.graph)?;
    let p = args.weights.params()?;
    let k = match args.space {
        SpaceArg::Edge => build_edge_kernel(&g, &p)?,
        SpaceArg::Wedge => build_wedge_kernel(&g, &p)?,
    };
    let mut text = serde_json::to_string_pretty(&dump_kernel(&g, &p, &k))?;
    text.push('\n');
    emit(args.out.as_deref(), &text)?;
    Ok(ExitCode::SUCCESS)
}

fn configure_threads() -> Result<()> {
    if let Ok(raw) = std::env::var("WALKLAB_THREADS") {
        let n: usize = raw.parse().with_context(|| format!("WALKLAB_THREADS={raw:?} is not a thread count"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<ExitCode> {
    configure_threads()?;
    match &cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Recurrence(a) => cmd_recurrence(a),
        Command::Kernel(a) => cmd_kernel(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
