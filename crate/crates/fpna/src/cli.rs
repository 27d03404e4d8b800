//! Command-line front end.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use fpna_core::Engine;

use crate::error::{HarnessError, Result};
use crate::experiments::{
    bench::run_bench, determinism::run_determinism, gnn::run_gnn, maxvs::run_maxvs, ops::run_op_sweep, parse_params,
    pdf::run_pdf, permute::run_permute_demo,
};
use crate::pool::{Pool, THREADS_ENV};
use crate::report::{emit_report, ExperimentKind, Format, Report};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "fpna", version, about = "Floating-point non-associativity experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Serial sums before and after a permutation.
    PermuteDemo(Options),
    /// PDF of V_s for SPSA or AO.
    Pdf(Options),
    /// Growth of max |V_s| with n.
    Maxvs(Options),
    /// Bitwise determinism across runs and pool sizes.
    Determinism(Options),
    /// Relative timings and performance penalty.
    Bench(Options),
    /// Scatter-reduce / index-add sweep over dims and ratios.
    Ops(Options),
    /// GraphSAGE inference variability.
    Gnn(Options),
}

#[derive(Debug, Clone, PartialEq, Eq, clap::Args)]
pub struct Options {
    /// JSON parameter file.
    #[arg(long, value_name = "FILE")]
    pub spec: PathBuf,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = "fpna-out")]
    pub out: PathBuf,
    /// Worker threads.
    #[arg(long, value_name = "K", env = THREADS_ENV)]
    pub threads: Option<usize>,
    /// Overrides the `seed` field of the spec file.
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
}

impl Command {
    pub fn split(&self) -> (ExperimentKind, &Options) {
        match self {
            Command::PermuteDemo(o) => (ExperimentKind::PermuteDemo, o),
            Command::Pdf(o) => (ExperimentKind::Pdf, o),
            Command::Maxvs(o) => (ExperimentKind::MaxvsSweep, o),
            Command::Determinism(o) => (ExperimentKind::DeterminismCheck, o),
            Command::Bench(o) => (ExperimentKind::Bench, o),
            Command::Ops(o) => (ExperimentKind::OpSweep, o),
            Command::Gnn(o) => (ExperimentKind::GnnDemo, o),
        }
    }
}

/// Strips the optional `schema` and `kind` envelope fields, applies the seed
/// override, and returns the parameter object.
pub fn prepare_spec(kind: ExperimentKind, mut v: serde_json::Value, seed: Option<u64>) -> Result<serde_json::Value> {
    let obj = v
        .as_object_mut()
        .ok_or_else(|| HarnessError::usage("spec must be a JSON object"))?;
    if let Some(s) = obj.remove("schema") {
        if s != "fpna-spec/1" {
            return Err(HarnessError::usage(format!("unsupported spec schema {s}")));
        }
    }
    if let Some(k) = obj.remove("kind") {
        let declared: ExperimentKind =
            serde_json::from_value(k.clone()).map_err(|_| HarnessError::usage(format!("unknown kind {k}")))?;
        if declared != kind {
            return Err(HarnessError::usage(format!(
                "spec is for {} but the command runs {}",
                declared.file_stem(),
                kind.file_stem()
            )));
        }
    }
    if let Some(s) = seed {
        obj.insert("seed".into(), s.into());
    }
    Ok(v)
}

pub fn run_experiment(kind: ExperimentKind, params: serde_json::Value, pool: &Pool) -> Result<Report> {
    let engine = Engine::new(pool);
    match kind {
        ExperimentKind::PermuteDemo => run_permute_demo(&parse_params(params)?),
        ExperimentKind::Pdf => run_pdf(&parse_params(params)?, &engine),
        ExperimentKind::MaxvsSweep => run_maxvs(&parse_params(params)?, &engine),
        ExperimentKind::DeterminismCheck => run_determinism(&parse_params(params)?),
        ExperimentKind::Bench => run_bench(&parse_params(params)?, &engine),
        ExperimentKind::OpSweep => run_op_sweep(&parse_params(params)?, &engine),
        ExperimentKind::GnnDemo => run_gnn(&parse_params(params)?, &engine),
    }
}

fn read_spec(path: &Path) -> Result<serde_json::Value> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    serde_json::from_str(&text).map_err(HarnessError::Spec)
}

fn execute(command: &Command) -> Result<Report> {
    let (kind, opts) = command.split();
    let params = prepare_spec(kind, read_spec(&opts.spec)?, opts.seed)?;
    let pool = Pool::from_env(opts.threads)?;
    let report = run_experiment(kind, params, &pool)?;
    for path in emit_report(&report, &opts.out, &[Format::Json, Format::Csv, Format::Svg])? {
        println!("wrote {}", path.display());
    }
    Ok(report)
}

/// Parses `args`, runs the experiment and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Cli::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&args.command) {
        Ok(report) => {
            for c in &report.checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if report.passed() {
                EXIT_OK
            } else {
                EXIT_CHECK_FAILED
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}
