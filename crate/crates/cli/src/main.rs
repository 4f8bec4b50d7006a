use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use mfm_core::algorithms::{by_name, AlgorithmParams};
use mfm_core::format::{parse_assignment, parse_graph, to_dot, write_assignment, write_graph};
use mfm_core::graph::two_coloring;
use mfm_core::lowerbound::{harness, HarnessOptions, LbChainReport, LbOutcome};
use mfm_core::oracle::{exhaustive_mfm_search, obs32_witness_search, OracleError};
use mfm_core::sim::{trace_to_jsonl, SimError};
use mfm_core::{generate, run, run_loopy, Model, PortGraph, Rat, RunOptions, ValueSet};

/// Distributed maximal fractional matching: generators, simulator, verifier
/// and lower-bound harness.
#[derive(Parser)]
#[command(name = "mfm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated instance in the graph text format.
    Generate(GenerateArgs),
    /// Run an algorithm on a graph; the assignment goes to --out, stats JSON to --stats.
    Run(RunArgs),
    /// Check that an assignment is a maximal fractional matching.
    Verify {
        graph: PathBuf,
        assignment: PathBuf,
        /// Admissible values, `S(d)` or `R<=n`.
        #[arg(long)]
        value_set: Option<ValueSet>,
    },
    /// Drive an algorithm along the loopy lower-bound chain and report JSON.
    LbHarness(LbArgs),
    /// Brute-force checks for small instances.
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// Render a graph, and optionally an assignment, as Graphviz DOT.
    ExportDot {
        graph: PathBuf,
        #[arg(long)]
        assignment: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Path,
    Cycle,
    Random,
    G0,
    LbChain,
}

#[derive(clap::Args)]
struct GenerateArgs {
    kind: Kind,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    delta: Option<usize>,
    /// Number of loops in G_0, and chain length for lb-chain.
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Algorithm whose outputs steer the lb-chain construction.
    #[arg(long, default_value = "mfm")]
    algorithm: String,
    /// Output file; stdout when absent. Ignored for lb-chain.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory receiving G_0 .. G_{d-1} for lb-chain.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(clap::Args)]
struct RunArgs {
    graph: PathBuf,
    #[arg(long, default_value = "mfm")]
    algorithm: String,
    /// Maximum degree the algorithm is built for; defaults to the graph's.
    #[arg(long)]
    delta: Option<usize>,
    #[arg(long, default_value = "po")]
    model: Model,
    #[arg(long, default_value_t = 100_000)]
    max_rounds: usize,
    /// Seed for LOCAL identifiers.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    stats: Option<PathBuf>,
    /// Per-round JSON-lines trace.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(clap::Args)]
struct LbArgs {
    #[arg(long)]
    d: usize,
    #[arg(long, default_value = "mfm")]
    algorithm: String,
    /// Defaults to 2d, the degree of every node in the chain.
    #[arg(long)]
    delta: Option<usize>,
    /// Fixed T for every level instead of measured rounds plus margin.
    #[arg(long)]
    t: Option<usize>,
    #[arg(long, default_value_t = 2)]
    margin: usize,
    #[arg(long, default_value = "po")]
    model: Model,
    #[arg(long, default_value_t = 100_000)]
    max_rounds: usize,
    /// Directory receiving each level's graph.
    #[arg(long)]
    dump_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Enumerate every maximal fractional matching with values in a finite set.
    MfmSearch {
        graph: PathBuf,
        #[arg(long)]
        value_set: ValueSet,
    },
    /// Grid search for a solution whose loop and edge values stay in low classes.
    Obs32 {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        target: Rat,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        r_prime: usize,
        #[arg(long, default_value_t = 24)]
        q_max: u64,
    },
}

/// Exit codes.
const VERIFY_FAILED: u8 = 1;
const USAGE: u8 = 2;
const FAULT: u8 = 3;
const BUDGET: u8 = 4;

struct Failure {
    code: u8,
    error: anyhow::Error,
}

trait Code<T> {
    fn code(self, code: u8) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Code<T> for Result<T, E> {
    fn code(self, code: u8) -> Result<T, Failure> {
        self.map_err(|e| Failure { code, error: e.into() })
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { USAGE } else { 0 });
        }
    };
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(Failure { code, error }) => {
            eprintln!("error: {error:#}");
            ExitCode::from(code)
        }
    }
}

fn dispatch(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Generate(args) => cmd_generate(args),
        Command::Run(args) => cmd_run(args),
        Command::Verify { graph, assignment, value_set } => cmd_verify(&graph, &assignment, value_set),
        Command::LbHarness(args) => cmd_lb_harness(args),
        Command::Oracle(cmd) => cmd_oracle(cmd),
        Command::ExportDot { graph, assignment, out } => {
            let g = load_graph(&graph)?;
            let x = match assignment {
                Some(path) => Some(parse_assignment(&read(&path)?, g.edge_count()).code(USAGE)?),
                None => None,
            };
            emit(out.as_deref(), &to_dot(&g, x.as_ref()))?;
            Ok(0)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).code(USAGE)
}

fn load_graph(path: &Path) -> Result<PortGraph, Failure> {
    parse_graph(&read(path)?).with_context(|| format!("parsing {}", path.display())).code(USAGE)
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())).code(USAGE),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json(value: &impl Serialize) -> String {
    serde_json::to_string_pretty(value).expect("serializable") + "\n"
}

fn required<T>(value: Option<T>, flag: &str, kind: &str) -> Result<T, Failure> {
    value.ok_or_else(|| anyhow!("{kind} needs --{flag}")).code(USAGE)
}

fn cmd_generate(args: GenerateArgs) -> Result<u8, Failure> {
    let g = match args.kind {
        Kind::Path | Kind::Cycle => {
            let n = required(args.n, "n", "this generator")?;
            match args.kind {
                Kind::Path if n >= 1 => generate::path(n, args.seed),
                Kind::Cycle if n >= 3 => generate::cycle(n, args.seed),
                _ => return Err(anyhow!("--n {n} is too small")).code(USAGE),
            }
        }
        Kind::Random => {
            let n = required(args.n, "n", "random")?;
            let delta = required(args.delta, "delta", "random")?;
            if n == 0 || delta == 0 {
                return Err(anyhow!("random needs n >= 1 and delta >= 1")).code(USAGE);
            }
            generate::random_graph(n, delta, args.seed)
        }
        Kind::G0 => {
            let d = required(args.d, "d", "g0")?;
            if d == 0 {
                return Err(anyhow!("g0 needs d >= 1")).code(USAGE);
            }
            generate::g0(d)
        }
        Kind::LbChain => {
            let d = required(args.d, "d", "lb-chain")?;
            let dir = required(args.out_dir, "out-dir", "lb-chain")?;
            let report = lb_chain(d, &args.algorithm, args.delta, HarnessOptions::default())?;
            dump_levels(&report, &dir)?;
            return Ok(outcome_code(&report.outcome));
        }
    };
    emit(args.out.as_deref(), &write_graph(&g))?;
    Ok(0)
}

#[derive(Serialize)]
struct RunStats {
    algorithm: String,
    model: Model,
    nodes: usize,
    edges: usize,
    max_degree: usize,
    rounds: usize,
    round_bound: Option<usize>,
    /// Number of edges per denominator class.
    class_histogram: BTreeMap<u64, usize>,
    value_set: String,
    values_in_set: bool,
}

fn cmd_run(args: RunArgs) -> Result<u8, Failure> {
    let g = load_graph(&args.graph)?;
    let delta = args.delta.unwrap_or(g.max_degree()).max(1);
    if delta < g.max_degree() {
        return Err(anyhow!("--delta {delta} is below the graph's maximum degree {}", g.max_degree())).code(USAGE);
    }
    let alg = by_name(&args.algorithm, AlgorithmParams { delta }).code(USAGE)?;
    let mut opts = RunOptions::with_max_rounds(args.max_rounds);
    opts.id_seed = args.seed;
    opts.trace = args.trace.is_some();
    if args.algorithm == "proposal-mm" {
        let coloring = two_coloring(&g).ok_or_else(|| anyhow!("proposal-mm needs a bipartite graph")).code(USAGE)?;
        opts.coloring = Some(coloring);
    }
    let result = if g.has_loops() { run_loopy(&g, &alg, args.model, &opts) } else { run(&g, &alg, args.model, &opts) };
    let result = result.map_err(|e| {
        let code = match e {
            SimError::LocalOnLoopy | SimError::BadIds(_) | SimError::BadColoring { .. } => USAGE,
            SimError::RoundBudget(_) => BUDGET,
            _ => FAULT,
        };
        Failure { code, error: e.into() }
    })?;

    let value_set = ValueSet::for_max_degree(delta);
    let mut class_histogram = BTreeMap::new();
    for v in result.assignment.values() {
        *class_histogram.entry(v.class_index()).or_insert(0) += 1;
    }
    let stats = RunStats {
        algorithm: alg.name(),
        model: args.model,
        nodes: g.node_count(),
        edges: g.edge_count(),
        max_degree: g.max_degree(),
        rounds: result.rounds,
        round_bound: alg.round_bound(),
        class_histogram,
        value_set: value_set.to_string(),
        values_in_set: result.assignment.values().iter().all(|v| value_set.contains(v)),
    };
    emit(args.out.as_deref(), &write_assignment(&result.assignment))?;
    match &args.stats {
        Some(path) => emit(Some(path), &json(&stats))?,
        None => eprint!("{}", json(&stats)),
    }
    if let (Some(path), Some(trace)) = (&args.trace, &result.trace) {
        emit(Some(path), &trace_to_jsonl(trace))?;
    }
    Ok(0)
}

fn cmd_verify(graph: &Path, assignment: &Path, value_set: Option<ValueSet>) -> Result<u8, Failure> {
    let g = load_graph(graph)?;
    let x = parse_assignment(&read(assignment)?, g.edge_count())
        .with_context(|| format!("parsing {}", assignment.display()))
        .code(USAGE)?;
    let report = mfm_core::verify(&g, &x, value_set).code(USAGE)?;
    print!("{}", json(&report));
    Ok(if report.is_valid_mfm() { 0 } else { VERIFY_FAILED })
}

fn lb_chain(d: usize, algorithm: &str, delta: Option<usize>, opts: HarnessOptions) -> Result<LbChainReport, Failure> {
    if d == 0 {
        return Err(anyhow!("the chain needs d >= 1")).code(USAGE);
    }
    let alg = by_name(algorithm, AlgorithmParams { delta: delta.unwrap_or(2 * d) }).code(USAGE)?;
    Ok(harness(&alg, d, &opts))
}

fn dump_levels(report: &LbChainReport, dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display())).code(USAGE)?;
    for level in &report.levels {
        emit(Some(&dir.join(format!("g{}.graph", level.index))), &write_graph(&level.graph))?;
    }
    Ok(())
}

fn outcome_code(outcome: &LbOutcome) -> u8 {
    match outcome {
        LbOutcome::Completed => 0,
        LbOutcome::VerifyFailed { .. } | LbOutcome::TheoryViolation { .. } => VERIFY_FAILED,
        LbOutcome::EngineFault { .. } => FAULT,
    }
}

fn cmd_lb_harness(args: LbArgs) -> Result<u8, Failure> {
    let opts = HarnessOptions { t_override: args.t, margin: args.margin, model: args.model, max_rounds: args.max_rounds };
    let report = lb_chain(args.d, &args.algorithm, args.delta, opts)?;
    if let Some(dir) = &args.dump_dir {
        dump_levels(&report, dir)?;
    }
    print!("{}", json(&report));
    Ok(outcome_code(&report.outcome))
}

#[derive(Serialize)]
struct SearchReport {
    value_set: String,
    solutions: usize,
    assignments: Vec<Vec<Rat>>,
}

fn cmd_oracle(cmd: OracleCommand) -> Result<u8, Failure> {
    let oracle_code = |e: OracleError| match e {
        OracleError::TooLarge(_) => Failure { code: BUDGET, error: e.into() },
        _ => Failure { code: USAGE, error: e.into() },
    };
    match cmd {
        OracleCommand::MfmSearch { graph, value_set } => {
            let g = load_graph(&graph)?;
            let Some(values) = value_set.elements() else {
                return Err(anyhow!("{value_set} is infinite; pass a finite S(d)")).code(USAGE);
            };
            let found = exhaustive_mfm_search(&g, &values).map_err(oracle_code)?;
            let report = SearchReport {
                value_set: value_set.to_string(),
                solutions: found.len(),
                assignments: found.into_iter().map(|x| x.into_values()).collect(),
            };
            print!("{}", json(&report));
            Ok(0)
        }
        OracleCommand::Obs32 { n, target, r, r_prime, q_max } => {
            let report = obs32_witness_search(n, &target, r, r_prime, q_max).map_err(oracle_code)?;
            print!("{}", json(&report));
            Ok(if report.holds() { 0 } else { VERIFY_FAILED })
        }
    }
}
