//! Command-line front end: generation, reduction, solving and verification
//! verbs over the `ocsp-core` file formats.
//!
//! Exit status is 0 on success, 2 when a verb ran but the property it checks
//! failed, and 1 on usage, schema or I/O errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

mod commands;
pub mod report;

pub use report::{blob_hash, Report};

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "OCSP_WORKERS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VERIFY: i32 = 2;

#[derive(Debug, Parser, Serialize)]
#[command(name = "ocsp", version, about = "Ordering CSP reductions, solvers and verifiers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub params: Params,
}

/// Parameters shared by all verbs.
#[derive(Debug, Clone, Args, Serialize)]
pub struct Params {
    /// Alphabet size of the base distribution.
    #[arg(long, global = true)]
    pub q: Option<usize>,
    /// Noise rate, as a fraction or finite decimal.
    #[arg(long, global = true)]
    pub gamma: Option<String>,
    /// Bucket count.
    #[arg(long = "Gamma", global = true)]
    #[serde(rename = "Gamma")]
    pub buckets: Option<usize>,
    #[arg(long, global = true)]
    pub t: Option<usize>,
    #[arg(long, global = true)]
    pub q1: Option<usize>,
    #[arg(long, global = true)]
    pub q2: Option<usize>,
    /// Defaults to a fixed constant.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub samples: Option<u64>,
    /// Variable cap for exhaustive search and materialized reductions.
    #[arg(long, global = true)]
    pub cap: Option<usize>,
    /// Format of the summary written to stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Also write the JSON report to this path.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Random Label Cover instance, optionally with a planted perfect labeling.
    GenLc(GenLcArgs),
    /// Materialized reduction of a Label Cover instance with one base distribution.
    Reduce(ReduceArgs),
    /// Materialized average of the three NBTW_j reductions.
    Overlay(OverlayArgs),
    /// Replace every NBTW constraint by the six-arc MAS gadget.
    Gadget(GadgetArgs),
    /// Value of an instance: exhaustive, local search, or Monte-Carlo.
    Solve(SolveArgs),
    /// Value of an ordering, or of a table assignment on a reduction.
    Eval(EvalArgs),
    /// Exhaustive property checks on a base distribution.
    DistVerify(DistVerifyArgs),
    /// Finite-function inequalities: hc, bucketing, decoupling, influence.
    AnalysisVerify(AnalysisArgs),
    /// Dictator tables for a labeling.
    Dictate(DictateArgs),
    /// Labeling decoded from a table assignment.
    Decode(DecodeArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct GenLcArgs {
    /// Left label count L.
    #[arg(long = "labels-left")]
    pub labels_left: usize,
    /// Right label count R.
    #[arg(long = "labels-right")]
    pub labels_right: usize,
    #[arg(long)]
    pub left: usize,
    #[arg(long)]
    pub right: usize,
    #[arg(long)]
    pub edges: usize,
    #[arg(long)]
    pub planted: bool,
    #[arg(long)]
    pub out: PathBuf,
    /// Where to write the planted labeling.
    #[arg(long)]
    pub labeling_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Auto,
    Materialize,
    Stream,
}

#[derive(Debug, Args, Serialize)]
pub struct ReduceArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Named distribution (btw:q, nbtw:q, nbtw:q:j, so:t:q1:q2) or JSON file.
    /// Derived from --pred and the alphabet flags when omitted.
    #[arg(long)]
    pub base: Option<String>,
    #[arg(long, default_value = "NBTW")]
    pub pred: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct OverlayArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct GadgetArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct SolveArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Exhaustive search (default).
    #[arg(long)]
    pub exact: bool,
    #[arg(long, conflicts_with = "exact")]
    pub local: bool,
    /// Monte-Carlo estimate of one ordering's value.
    #[arg(long, conflicts_with_all = ["exact", "local"])]
    pub mc: bool,
    /// Ordering for --mc; a seeded random ordering when omitted.
    #[arg(long)]
    pub ordering: Option<PathBuf>,
    /// Iteration limit for --local.
    #[arg(long, default_value_t = 10_000)]
    pub iters: u64,
    /// Where to write the best ordering found.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct EvalArgs {
    /// OCSP instance, evaluated at --ordering.
    #[arg(long = "in", requires = "ordering", conflicts_with_all = ["lc", "assignment"])]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub ordering: Option<PathBuf>,
    /// Label Cover instance, evaluated at --assignment through its reduction.
    #[arg(long, requires = "assignment")]
    pub lc: Option<PathBuf>,
    #[arg(long)]
    pub assignment: Option<PathBuf>,
    /// Use the NBTW overlay instead of a single base distribution.
    #[arg(long)]
    pub overlay: bool,
    #[arg(long)]
    pub base: Option<String>,
    #[arg(long, default_value = "NBTW")]
    pub pred: String,
    #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
    pub mode: ModeArg,
}

#[derive(Debug, Args, Serialize)]
pub struct DistVerifyArgs {
    /// Named distribution or JSON file.
    pub distribution: String,
    /// Predicate for the expected payoff; inferred for named distributions.
    #[arg(long)]
    pub pred: Option<String>,
    /// Write the distribution as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AnalysisKind {
    Hc,
    Bucketing,
    Decoupling,
    Influence,
}

#[derive(Debug, Args, Serialize)]
pub struct AnalysisArgs {
    pub kind: AnalysisKind,
    /// Finite function (hc, influence).
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// Left and right tables (bucketing, decoupling).
    #[arg(long)]
    pub f: Option<PathBuf>,
    #[arg(long)]
    pub g: Option<PathBuf>,
    /// Projection as comma-separated 0-based left coordinates; identity when omitted.
    #[arg(long, value_delimiter = ',')]
    pub pi: Option<Vec<usize>>,
    #[arg(long)]
    pub base: Option<String>,
    #[arg(long, default_value = "NBTW")]
    pub pred: String,
}

#[derive(Debug, Args, Serialize)]
pub struct DictateArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub labeling: PathBuf,
    /// Distribution whose alphabets the tables use; nbtw:q when omitted.
    #[arg(long)]
    pub base: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct DecodeArgs {
    #[arg(long)]
    pub lc: PathBuf,
    #[arg(long)]
    pub assignment: PathBuf,
    /// Independent decoding runs; the first labeling is written to --out.
    #[arg(long, default_value_t = 1)]
    pub trials: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A failure that maps to a non-zero exit status.
#[derive(Debug)]
pub enum Failure {
    Usage(anyhow::Error),
    /// The verb completed and produced a report, but its check failed.
    Verification(Box<Report>),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Usage(e)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Usage(e.into())
    }
}

impl From<ocsp_core::Error> for Failure {
    fn from(e: ocsp_core::Error) -> Self {
        Failure::Usage(e.into())
    }
}

fn configure_workers() {
    let Ok(raw) = std::env::var(WORKERS_ENV) else { return };
    match raw.trim().parse::<usize>() {
        Ok(n) if n > 0 => {
            // Fails only if the pool already exists, e.g. on a second run in-process.
            if rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
                log::debug!("worker pool already configured");
            }
        }
        _ => log::warn!("ignoring {WORKERS_ENV}={raw:?}"),
    }
}

/// Parses `args` (including the program name), runs the verb, and writes the
/// summary to `out` and diagnostics to `err`. Returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    configure_workers();
    let (report, code) = match commands::execute(&cli) {
        Ok(r) => (r, EXIT_OK),
        Err(Failure::Verification(r)) => (*r, EXIT_VERIFY),
        Err(Failure::Usage(e)) => {
            let _ = writeln!(err, "error: {e:#}");
            return EXIT_USAGE;
        }
    };
    if let Some(path) = &cli.params.report {
        if let Err(e) = std::fs::write(path, report.to_json()) {
            let _ = writeln!(err, "error: cannot write {}: {e}", path.display());
            return EXIT_USAGE;
        }
    }
    let written = match cli.params.format {
        Format::Json => out.write_all(report.to_json().as_bytes()).map_err(anyhow::Error::from),
        Format::Csv => report.write_csv(&mut *out),
    };
    if let Err(e) = written {
        let _ = writeln!(err, "error: {e:#}");
        return EXIT_USAGE;
    }
    if code == EXIT_VERIFY {
        let _ = writeln!(err, "verification failed");
    }
    code
}
