//! `msample`: command-line front end for the matroid-sampling library.
//!
//! Exit codes: 0 on success, 2 on invalid input, 3 when a computed check
//! misses its tolerance. Errors are written to stderr as JSON objects.

mod commands;
mod input;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use matroid_sampling::analysis::ScanMode;
use matroid_sampling::genpoly::DEFAULT_ENUMERATION_CAP;
use serde_json::{json, Value};

use crate::output::Format;

#[derive(Debug, Parser)]
#[command(
    name = "msample",
    version,
    about = "Independence probabilities of i.i.d. samples on matroids"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Ground set size, rank, number of independent K-sets, transitivity.
    Info,
    /// F(p), f(p) and h(p); the exact rational too for uniform p on PG.
    Eval,
    /// Closed-form F(u) on PG(N−1, q) checked against enumeration.
    ExactUniform,
    /// Maximize F over the simplex from --dist or a seeded random start.
    Optimize,
    /// Monte Carlo estimate of F(p) compared with the exact value.
    Mc,
    /// Minimum of the stability ratio over random distributions.
    Scan,
    /// Check F(u) − F(p) = ‖p − u‖² for K = 2 on random p.
    K2check,
    /// Hessian of F at u on PG(N−1, q) against its closed form.
    Hesscheck,
    /// Average p over the orbits of a generator set and compare h.
    Orbitavg,
    /// Push a distribution on nonzero vectors of 𝔽_q^N to projective points.
    Pushforward,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Matroid spec as inline JSON or a path to a JSON file.
    #[arg(long, global = true)]
    pub spec: Option<String>,
    /// Sample size K; defaults to the rank.
    #[arg(long, global = true)]
    pub k: Option<usize>,
    /// "uniform", an inline JSON array, or a path to one.
    #[arg(long, global = true)]
    pub dist: Option<String>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Monte Carlo trials.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    pub trials: u64,
    /// Random samples for scan, k2check and hesscheck.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Worker thread cap; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Largest number of independent K-sets to enumerate.
    #[arg(long, global = true, default_value_t = DEFAULT_ENUMERATION_CAP)]
    pub enum_cap: usize,
    /// Override the subcommand's tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Automorphism generators: "family", inline JSON permutations, or a path.
    #[arg(long, global = true)]
    pub gens: Option<String>,
    /// Scan sampler: dirichlet or sparse.
    #[arg(long, global = true, default_value = "dirichlet")]
    pub mode: ScanMode,
    /// Optimizer iteration limit.
    #[arg(long, global = true, default_value_t = 10_000)]
    pub max_iters: usize,
    /// Initial optimizer step size.
    #[arg(long, global = true, default_value_t = 0.5)]
    pub step: f64,
}

#[derive(Debug)]
pub enum CliError {
    Validation { kind: String, message: String },
}

impl CliError {
    pub fn validation(kind: &str, message: impl Into<String>) -> Self {
        CliError::Validation {
            kind: kind.to_string(),
            message: message.into(),
        }
    }
}

impl From<matroid_sampling::Error> for CliError {
    fn from(e: matroid_sampling::Error) -> Self {
        CliError::validation(e.kind(), e.to_string())
    }
}

/// A finished report; `pass` is false when a check missed its tolerance.
pub struct Outcome {
    pub report: Value,
    pub pass: bool,
}

fn report_error(kind: &str, message: &str) {
    let body = json!({"error": {"kind": kind, "message": message}});
    eprintln!("{body}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            report_error("usage", e.to_string().trim());
            return ExitCode::from(2);
        }
    };
    if let Some(n) = cli.run.threads {
        if n == 0 {
            report_error("invalid_config", "--threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            report_error("io", &e.to_string());
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Info => commands::info(&cli.run),
        Command::Eval => commands::eval(&cli.run),
        Command::ExactUniform => commands::exact_uniform(&cli.run),
        Command::Optimize => commands::optimize(&cli.run),
        Command::Mc => commands::mc(&cli.run),
        Command::Scan => commands::scan(&cli.run),
        Command::K2check => commands::k2check(&cli.run),
        Command::Hesscheck => commands::hesscheck(&cli.run),
        Command::Orbitavg => commands::orbitavg(&cli.run),
        Command::Pushforward => commands::pushforward(&cli.run),
    };
    let outcome = match result {
        Ok(o) => o,
        Err(CliError::Validation { kind, message }) => {
            report_error(&kind, &message);
            return ExitCode::from(2);
        }
    };
    let text = output::render(&outcome.report, cli.run.format);
    if let Err(e) = output::emit(&text, cli.run.out.as_deref()) {
        report_error("io", &e.to_string());
        return ExitCode::from(2);
    }
    if outcome.pass {
        ExitCode::SUCCESS
    } else {
        report_error(
            "tolerance",
            "a check exceeded its tolerance; see the report",
        );
        ExitCode::from(3)
    }
}
