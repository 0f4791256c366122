//! `mst`: command-line front end for the metric sparsity toolbox.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

#[derive(Parser)]
#[command(name = "mst", version, about = "Metric sparsity toolbox")]
struct Cli {
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    json: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ordered partition from a decomposition and its weak coloring number.
    Wcol(WcolArgs),
    /// Sparse cover built from an ordered partition.
    Cover(CoverArgs),
    /// Flatness witnesses for a scattered vertex set.
    Flat(FlatArgs),
    /// Validate, build greedily or search exhaustively for an eps-ladder.
    Ladder(LadderArgs),
    /// Write a lower-bound instance with its ladder and decomposition.
    GenLb(GenLbArgs),
    /// Write a seeded random partial k-tree or grid.
    Gen(GenArgs),
    /// Build a k-Center coreset.
    Coreset(CoresetArgs),
    /// Check a coreset against every center set up to size kmax.
    VerifyCoreset(VerifyCoresetArgs),
    /// Validate a tree decomposition.
    VerifyTd(VerifyTdArgs),
    /// Validate a buffered cop decomposition.
    VerifyBcd(VerifyBcdArgs),
    /// Evaluate a closed-form bound.
    Bounds(BoundsArgs),
}

#[derive(Args, Serialize)]
pub struct PartitionSource {
    /// Tree decomposition (PACE .td).
    #[arg(long, conflicts_with = "bcd", required_unless_present = "bcd")]
    pub td: Option<PathBuf>,
    /// Buffered cop decomposition (.bcd).
    #[arg(long)]
    pub bcd: Option<PathBuf>,
    /// Excluded minor size for the bound when --bcd is used.
    #[arg(long, default_value_t = 5)]
    pub h: u64,
}

#[derive(Args, Serialize)]
pub struct WcolArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub rho: f64,
    #[arg(long)]
    pub r: f64,
    #[command(flatten)]
    pub source: PartitionSource,
}

#[derive(Args, Serialize)]
pub struct CoverArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub rho: f64,
    #[arg(long)]
    pub r: f64,
    #[command(flatten)]
    pub source: PartitionSource,
}

#[derive(Args, Serialize)]
pub struct FlatArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub r: f64,
    #[arg(long)]
    pub rho: f64,
    #[arg(long)]
    pub m: usize,
    /// Scattered vertex set: a file of ids or a comma-separated list.
    #[arg(long)]
    pub a: String,
    /// Buffered cop decomposition; built heuristically when absent.
    #[arg(long)]
    pub bcd: Option<PathBuf>,
    /// Minor size handed to the heuristic decomposition.
    #[arg(long, default_value_t = 5)]
    pub h: usize,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LadderMode {
    Validate,
    Greedy,
    Brute,
}

#[derive(Args, Serialize)]
pub struct LadderArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, value_enum)]
    pub mode: LadderMode,
    #[arg(long)]
    pub eps: f64,
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    /// Ladder pairs `x p`, one per line (validate mode).
    #[arg(long)]
    pub ladder: Option<PathBuf>,
    /// Centers: a file of ids or a comma-separated list.
    #[arg(long)]
    pub centers: Option<String>,
    /// Points: a file of ids or a comma-separated list.
    #[arg(long)]
    pub points: Option<String>,
    /// Require every pair to be an edge of this matching.
    #[arg(long)]
    pub matching: Option<PathBuf>,
    /// Also require dist(x_j, p_i) >= r for all i, j.
    #[arg(long)]
    pub lb_extra: bool,
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
    /// Per-role size limit for brute mode.
    #[arg(long, default_value_t = mst_core::ladder::BRUTE_FORCE_MAX)]
    pub limit: usize,
}

#[derive(Args, Serialize)]
pub struct GenLbArgs {
    #[arg(long)]
    pub k: u64,
    #[arg(long)]
    pub r: u64,
    /// Exact epsilon, e.g. `0.1` or `1/10`.
    #[arg(long)]
    pub eps: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GenKind {
    Ktree,
    Grid,
}

#[derive(Args, Serialize)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: GenKind,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 20)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, default_value_t = 1.0)]
    pub keep: f64,
    #[arg(long, default_value_t = 4)]
    pub rows: usize,
    #[arg(long, default_value_t = 4)]
    pub cols: usize,
    #[arg(long, default_value_t = 1.0)]
    pub lo: f64,
    #[arg(long, default_value_t = 10.0)]
    pub hi: f64,
    /// Also write `<out>.inst` with this many random facilities.
    #[arg(long)]
    pub facilities: Option<usize>,
    /// k of the written clustering instance.
    #[arg(long, default_value_t = 1)]
    pub centers: usize,
}

#[derive(Args, Serialize)]
pub struct CoresetArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub eps: f64,
    /// Excluded minor size used only for the reported bounds.
    #[arg(long)]
    pub h: Option<u64>,
    /// Also write the selected client ids here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
pub struct VerifyCoresetArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// Id list, or a JSON report from `coreset`.
    #[arg(long)]
    pub coreset: PathBuf,
    #[arg(long)]
    pub eps: f64,
    #[arg(long)]
    pub kmax: usize,
}

#[derive(Args, Serialize)]
pub struct VerifyTdArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub td: PathBuf,
}

#[derive(Args, Serialize)]
pub struct VerifyBcdArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub bcd: PathBuf,
    #[arg(long)]
    pub delta: f64,
    #[arg(long)]
    pub gamma: f64,
    #[arg(long)]
    pub w: usize,
    #[arg(long, default_value_t = 0.0)]
    pub tolerance: f64,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    #[value(name = "minor-free", alias = "thm1")]
    MinorFree,
    #[value(name = "from-wcol", alias = "lemma4")]
    FromWcol,
    #[value(name = "lower-bound", alias = "thm3")]
    LowerBound,
    WcolMinorFree,
    WcolTreewidth,
}

#[derive(Args, Serialize)]
pub struct BoundsArgs {
    #[arg(long, value_enum)]
    pub kind: BoundKind,
    #[arg(long)]
    pub h: Option<u64>,
    #[arg(long)]
    pub eps: Option<String>,
    #[arg(long)]
    pub c: Option<String>,
    #[arg(long)]
    pub ratio: Option<String>,
    #[arg(long)]
    pub t: Option<u64>,
    #[arg(long)]
    pub r: Option<u64>,
    #[arg(long)]
    pub k: Option<u64>,
    #[arg(long)]
    pub x: Option<String>,
}

/// What a command failed with; maps to the exit status.
pub enum Failure {
    /// Bad arguments or unreadable input: exit 2.
    Usage(String),
    /// A check could not be carried out: exit 1.
    Failed(String),
}

impl From<mst_core::Error> for Failure {
    fn from(e: mst_core::Error) -> Self {
        use mst_core::Error as E;
        match e {
            E::InvalidArgument(_) | E::VertexOutOfRange { .. } | E::Parse { .. } => Failure::Usage(e.to_string()),
            E::TooLarge(_) | E::InvalidDecomposition(_) | E::Unreachable(_) => Failure::Failed(e.to_string()),
        }
    }
}

/// Result of one command before it is wrapped into a report.
pub struct Outcome {
    pub outputs: Value,
    pub verification: Vec<(&'static str, bool)>,
    pub seed: Option<u64>,
    /// Printed on stdout instead of the report (the report then goes only
    /// to `--json`).
    pub plain: Option<String>,
}

impl Outcome {
    pub fn new(outputs: Value) -> Self {
        Outcome { outputs, verification: Vec::new(), seed: None, plain: None }
    }

    pub fn check(mut self, name: &'static str, ok: bool) -> Self {
        self.verification.push((name, ok));
        self
    }
}

#[derive(Serialize)]
struct RunReport {
    command: &'static str,
    parameters: Value,
    seed: Option<u64>,
    outputs: Value,
    verification: serde_json::Map<String, Value>,
    ok: bool,
    timings: Timings,
}

#[derive(Serialize)]
struct Timings {
    elapsed_ms: f64,
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("MST_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Usage(format!("MST_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Failed(e.to_string()))
}

fn dispatch(cmd: &Command) -> (&'static str, Result<Value, serde_json::Error>, Result<Outcome, Failure>) {
    fn p<T: Serialize>(a: &T) -> Result<Value, serde_json::Error> {
        serde_json::to_value(a)
    }
    match cmd {
        Command::Wcol(a) => ("wcol", p(a), commands::wcol(a)),
        Command::Cover(a) => ("cover", p(a), commands::cover(a)),
        Command::Flat(a) => ("flat", p(a), commands::flat(a)),
        Command::Ladder(a) => ("ladder", p(a), commands::ladder(a)),
        Command::GenLb(a) => ("gen-lb", p(a), commands::gen_lb(a)),
        Command::Gen(a) => ("gen", p(a), commands::gen(a)),
        Command::Coreset(a) => ("coreset", p(a), commands::coreset(a)),
        Command::VerifyCoreset(a) => ("verify-coreset", p(a), commands::verify_coreset(a)),
        Command::VerifyTd(a) => ("verify-td", p(a), commands::verify_td(a)),
        Command::VerifyBcd(a) => ("verify-bcd", p(a), commands::verify_bcd(a)),
        Command::Bounds(a) => ("bounds", p(a), commands::bounds(a)),
    }
}

fn run(cli: Cli) -> Result<bool, Failure> {
    configure_threads()?;
    let start = Instant::now();
    let (command, parameters, outcome) = dispatch(&cli.command);
    let outcome = outcome?;
    let ok = outcome.verification.iter().all(|(_, v)| *v);
    let report = RunReport {
        command,
        parameters: parameters.map_err(|e| Failure::Failed(e.to_string()))?,
        seed: outcome.seed,
        outputs: outcome.outputs,
        verification: outcome
            .verification
            .iter()
            .map(|(k, v)| (k.to_string(), Value::Bool(*v)))
            .collect(),
        ok,
        timings: Timings { elapsed_ms: start.elapsed().as_secs_f64() * 1e3 },
    };
    let text = serde_json::to_string_pretty(&report).map_err(|e| Failure::Failed(e.to_string()))? + "\n";
    if let Some(plain) = &outcome.plain {
        println!("{plain}");
    }
    match &cli.json {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?,
        None if outcome.plain.is_none() => print!("{text}"),
        None => {}
    }
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Failed(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
