//! Command-line front end. Every report is JSON and embeds the full run
//! configuration; plot data goes to tab-separated tables.

mod commands;
mod input;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::embedding::DEFAULT_STEPS;
use crate::error::Error;
use crate::partition::DEFAULT_FIEDLER_ITERS;
use crate::pcg::{DEFAULT_MAX_ITERS, DEFAULT_REL_TOL};
use crate::rng::DEFAULT_SEED;

pub use input::{load_graph, GraphSpec, LoadedGraph};

pub const FORMAT_VERSION: &str = "heatsparse-report/1";

#[derive(Debug, Parser)]
#[command(
    name = "heatsparse",
    version,
    about = "Spectral graph sparsification toolkit"
)]
pub struct Cli {
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Repeat for more log output on standard error.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Command {
    /// Build a sparsifier and write it as Matrix Market plus an edge list.
    Sparsify(SparsifyArgs),
    /// Solve L x = b with the sparsifier as PCG preconditioner.
    Solve(SolveArgs),
    /// Bipartition by the sign of an approximate Fiedler vector.
    Partition(PartitionArgs),
    /// Dump heat and stretch tables for plotting.
    Stats(StatsArgs),
    /// Run the dense-oracle invariant checks on a small graph.
    OracleCheck(OracleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TreeKind {
    MaxWeight,
    LowStretch,
    /// Spine along the bottom row plus vertical teeth; grids only.
    HairComb,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GraphArgs {
    /// Matrix Market file with a graph Laplacian or SDD matrix.
    #[arg(
        long,
        required_unless_present = "generate",
        conflicts_with = "generate"
    )]
    pub input: Option<PathBuf>,
    /// Synthetic graph: grid:RxC, grid-random:RxC, random:N:DEG,
    /// geometric:N:K, tree:N or path:N.
    #[arg(long)]
    pub generate: Option<String>,
    #[arg(long, value_enum, default_value_t = TreeKind::MaxWeight)]
    pub tree: TreeKind,
    /// Seed for every random choice in the run.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DensifyArgs {
    /// Target relative condition number.
    #[arg(long, default_value_t = 100.0)]
    pub sigma2: f64,
    /// Power-iteration steps per heat vector.
    #[arg(long, default_value_t = DEFAULT_STEPS)]
    pub t: usize,
    /// Random vectors per round (default: max(4, ceil(log2 n))).
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long, default_value_t = 20)]
    pub max_rounds: usize,
    /// Per-round cap on recovered edges as a fraction of n.
    #[arg(long, default_value_t = 0.02)]
    pub round_fraction: f64,
    /// Total cap on recovered off-tree edges.
    #[arg(long)]
    pub edge_budget: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SparsifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub densify: DensifyArgs,
    /// Sparsifier Laplacian in Matrix Market format.
    #[arg(long)]
    pub out_mtx: Option<PathBuf>,
    /// Tree and recovered edges with their rounds.
    #[arg(long)]
    pub out_edges: Option<PathBuf>,
    /// JSON report (default: standard output).
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SolveArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub densify: DensifyArgs,
    /// Right-hand side, one value per line.
    #[arg(long, conflicts_with = "random_rhs")]
    pub rhs: Option<PathBuf>,
    /// Seed for a random right-hand side (used when --rhs is absent).
    #[arg(long)]
    pub random_rhs: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_REL_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITERS)]
    pub max_iters: usize,
    /// Solution vector, one value per line.
    #[arg(long)]
    pub out_x: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PartitionArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub densify: DensifyArgs,
    /// Inverse power iterations.
    #[arg(long, default_value_t = DEFAULT_FIEDLER_ITERS)]
    pub iters: usize,
    /// Also compute the direct Fiedler estimate and report the disagreement.
    #[arg(long)]
    pub compare_direct: bool,
    /// Per-vertex signs, one per line.
    #[arg(long)]
    pub out_signs: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct StatsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub graph: GraphArgs,
    #[arg(long, default_value_t = DEFAULT_STEPS)]
    pub t: usize,
    #[arg(long)]
    pub r: Option<usize>,
    /// Off-tree edge heats in rank order.
    #[arg(long)]
    pub heat_table: Option<PathBuf>,
    /// Per-edge stretch against the tree.
    #[arg(long)]
    pub stretch_table: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OracleArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub graph: GraphArgs,
    /// Off-tree edges added one at a time in the monotonicity check.
    #[arg(long, default_value_t = 5)]
    pub steps: usize,
    /// Shrink a tree edge in the first augmented sparsifier, which the
    /// monotonicity check must catch.
    #[arg(long)]
    pub corrupt: bool,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

/// A finished report plus whether the run met its goal.
pub struct Outcome {
    pub json: String,
    pub success: bool,
}

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    format_version: &'static str,
    config: &'a Command,
    result: T,
    wall_times: BTreeMap<&'static str, f64>,
}

pub(crate) fn render<T: Serialize>(
    config: &Command,
    result: T,
    wall_times: BTreeMap<&'static str, f64>,
) -> crate::Result<String> {
    let report = Report {
        format_version: FORMAT_VERSION,
        config,
        result,
        wall_times,
    };
    serde_json::to_string_pretty(&report)
        .map_err(|e| Error::InvalidArgument(format!("report serialization: {e}")))
}

/// Runs one subcommand and returns its JSON report.
pub fn execute(command: &Command) -> crate::Result<Outcome> {
    match command {
        Command::Sparsify(a) => commands::sparsify(command, a),
        Command::Solve(a) => commands::solve(command, a),
        Command::Partition(a) => commands::partition(command, a),
        Command::Stats(a) => commands::stats(command, a),
        Command::OracleCheck(a) => commands::oracle_check(command, a),
    }
}

fn report_path(command: &Command) -> Option<&Path> {
    match command {
        Command::Sparsify(a) => a.report.as_deref(),
        Command::Solve(a) => a.report.as_deref(),
        Command::Partition(a) => a.report.as_deref(),
        Command::Stats(a) => a.report.as_deref(),
        Command::OracleCheck(a) => a.report.as_deref(),
    }
}

fn emit(path: Option<&Path>, json: &str) -> crate::Result<()> {
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|e| Error::io(p, e))?;
            let mut out = BufWriter::new(file);
            writeln!(out, "{json}").map_err(|e| Error::io(p, e))?;
            out.flush().map_err(|e| Error::io(p, e))
        }
        None => {
            let mut out = io::stdout().lock();
            writeln!(out, "{json}").map_err(|e| Error::io("<stdout>", e))
        }
    }
}

/// Exit code for a library error: 1 for numerical failures, 2 otherwise.
pub fn error_code(err: &Error) -> u8 {
    match err {
        Error::Breakdown(_) | Error::NotConverged { .. } | Error::NonPositivePivot { .. } => 1,
        _ => 2,
    }
}

/// Entry point for the binary: 0 on success, 1 on a failed check or
/// non-convergence, 2 on usage or I/O errors.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).try_init();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("heatsparse: {e}");
            return ExitCode::from(2);
        }
    }
    let result = execute(&cli.command).and_then(|out| {
        emit(report_path(&cli.command), &out.json)?;
        Ok(out.success)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("heatsparse: {e}");
            ExitCode::from(error_code(&e))
        }
    }
}
