//! Command-line front end: argument parsing, output files and exit codes.

mod commands;

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use hsflow::brakke::{Status, Theorem};
use hsflow::report_io::{write_csv_series, write_json, Series, SuiteReport};
use hsflow::Error;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "hsflow", version, about = "Verification suites for Hamiltonian stationary self-similar Lagrangian flows")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Directory for the JSON report and CSV series.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Seed for sampled image distances and random boundary fields.
    #[arg(long, global = true, default_value_t = 20_240_601)]
    pub seed: u64,

    /// Run every cell on the calling thread.
    #[arg(long, global = true)]
    pub sequential: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lagrangian, closed-form, angle and stationarity checks on the catalog.
    VerifyImmersion {
        #[command(flatten)]
        pair: Pair,
        #[command(flatten)]
        geom: GeomOpts,
    },
    /// Shrinker/expander identities on the self-similar catalog objects.
    VerifySoliton {
        #[command(flatten)]
        pair: Pair,
        #[command(flatten)]
        geom: GeomOpts,
    },
    /// Flow identity, limit matching and divergence for the default test functions.
    Brakke {
        #[command(flatten)]
        pair: Pair,
        #[arg(long, default_value = "1.1")]
        which: Theorem,
        #[command(flatten)]
        flow: FlowOpts,
    },
    /// Coincidences, image distances and reparametrizations of the four cones.
    Cones {
        #[command(flatten)]
        pair: Pair,
        #[command(flatten)]
        cone: ConeOpts,
    },
    /// The full gluing suite of one theorem.
    Theorem {
        #[command(flatten)]
        pair: Pair,
        #[arg(long)]
        which: Theorem,
        #[command(flatten)]
        flow: FlowOpts,
    },
    /// Geometry and cone checks over a set of (p, q) pairs.
    Sweep {
        /// Pairs as p:q, comma separated. Default: coprime 1 ≤ q < p ≤ 5.
        #[arg(long, value_delimiter = ',', value_parser = parse_pair)]
        pairs: Vec<(u32, u32)>,
        /// Also run both theorem suites for each pair.
        #[arg(long)]
        theorems: bool,
        #[command(flatten)]
        geom: GeomOpts,
        #[command(flatten)]
        cone: ConeOpts,
        #[command(flatten)]
        flow: FlowOpts,
    },
    /// Checks on the λ-family level set and its time slice.
    Lambda {
        /// Nonzero λ values, comma separated.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        lambdas: Vec<f64>,
        /// Level C of Σλⱼ|xⱼ|² = C.
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        level: f64,
        #[command(flatten)]
        geom: GeomOpts,
    },
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct Pair {
    #[arg(long)]
    pub p: u32,
    #[arg(long)]
    pub q: u32,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct GeomOpts {
    /// Points per parameter direction.
    #[arg(long, default_value_t = 20)]
    pub grid: usize,
    /// |t| of the time slices.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub t: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub tol_lagrangian: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol_closed_form: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol_beta: f64,
    #[arg(long, default_value_t = 1e-9)]
    pub tol_stationarity: f64,
    #[arg(long, default_value_t = 1e-9)]
    pub tol_soliton: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol_special_h: f64,
    /// Negative controls must exceed this.
    #[arg(long, default_value_t = 1e-3)]
    pub tol_control: f64,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct ConeOpts {
    /// Sample count for image distances.
    #[arg(long, default_value_t = 1024)]
    pub samples: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub tol_coincident: f64,
    #[arg(long, default_value_t = 0.05)]
    pub tol_distinct: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub tol_shift: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub tol_reparametrization: f64,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct FlowOpts {
    /// |t| at which the flow identity is checked.
    #[arg(long, default_value_t = 1.0)]
    pub t_ref: f64,
    /// First time of the limit sequence t₀·2^{−k}.
    #[arg(long, default_value_t = 1.0)]
    pub t0: f64,
    /// K, the number of halvings.
    #[arg(long, default_value_t = 10)]
    pub levels: usize,
    /// First scale of the divergence sequence.
    #[arg(long, default_value_t = 1e-3)]
    pub divergence_t0: f64,
    #[arg(long, default_value_t = 1e-5)]
    pub tol_flow: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub tol_limit: f64,
    #[arg(long, default_value_t = 0.1)]
    pub tol_reduced_model: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol_boundary: f64,
}

fn parse_pair(s: &str) -> Result<(u32, u32), String> {
    let (p, q) = s.split_once(':').ok_or_else(|| format!("expected p:q, got {s:?}"))?;
    let p = p.trim().parse().map_err(|e| format!("bad p in {s:?}: {e}"))?;
    let q = q.trim().parse().map_err(|e| format!("bad q in {s:?}: {e}"))?;
    Ok((p, q))
}

/// What a command hands back: the report plus plot series.
pub struct Outcome {
    pub report: SuiteReport,
    pub series: Vec<Series>,
}

fn exit_code(status: Status) -> i32 {
    match status {
        Status::Pass => EXIT_PASS,
        Status::Fail => EXIT_FAIL,
        Status::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

fn is_usage(e: &Error) -> bool {
    matches!(
        e,
        Error::InvalidParams(_) | Error::Precondition(_) | Error::OutsideDomain { .. }
    )
}

fn write_outputs(out: &std::path::Path, outcome: &Outcome) -> hsflow::Result<()> {
    fs::create_dir_all(out)?;
    write_json(&outcome.report, &out.join(format!("{}.json", outcome.report.suite_id)))?;
    for s in &outcome.series {
        write_csv_series(s, &out.join(format!("{}.csv", s.name)))?;
    }
    Ok(())
}

/// Parses `args` (program name first) and runs the command; returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_PASS,
                ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => EXIT_USAGE,
                _ => EXIT_USAGE,
            };
        }
    };
    let outcome = match commands::execute(&cli) {
        Ok(o) => o,
        Err(e) if is_usage(&e) => {
            eprintln!("usage error: {e}");
            return EXIT_USAGE;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_FAIL;
        }
    };
    for c in &outcome.report.cells {
        println!("{:<12} {}", c.status.as_str().to_uppercase(), c.key);
    }
    let verdict = outcome.report.verdict();
    println!("verdict: {}", verdict.as_str());
    if let Some(out) = &cli.out {
        if let Err(e) = write_outputs(out, &outcome) {
            eprintln!("error writing {}: {e}", out.display());
            return EXIT_FAIL;
        }
    }
    exit_code(verdict)
}
