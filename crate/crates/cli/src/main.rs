//! `ctimer`: translate, verify and run the case studies for timing-annotated
//! MiniC sources.
//!
//! Exit status: 0 verification successful (or command completed), 1 an
//! assertion failed or the program faulted, 2 usage, input or internal error,
//! 3 a verification bound was exceeded.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "ctimer", version, about = "Timing verification for annotated MiniC programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rewrite timing annotations into plain C with explicit timer variables.
    ///
    /// Check the original program with your usual tools first; the output
    /// is meant for a second, timing-only pass.
    Translate {
        input: PathBuf,
        /// Output file; standard output when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Treat FLAG as defined in `#if`/`#ifdef` directives.
        #[arg(long = "define", short = 'D', value_name = "FLAG")]
        defines: Vec<String>,
    },
    /// Check every assertion on every bounded path.
    ///
    /// INPUT may be annotated or already translated.
    Verify {
        input: PathBuf,
        #[command(flatten)]
        bounds: BoundArgs,
        #[arg(long = "define", short = 'D', value_name = "FLAG")]
        defines: Vec<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Generate, verify and tabulate one of the built-in case studies.
    Scenario {
        #[command(subcommand)]
        scenario: Scenario,
    },
}

#[derive(Debug, Args)]
struct BoundArgs {
    /// Maximum iterations of any single loop.
    #[arg(long, default_value_t = 128)]
    unwind: u64,
    /// Bit width of timer variables; exceeding it is a runtime fault.
    #[arg(long, default_value = "64", value_parser = ["32", "64"])]
    timer_width: String,
    /// Give up after exploring this many paths.
    #[arg(long, default_value_t = 10_000_000)]
    max_paths: u64,
    /// Worker threads (0 = one per CPU). Results do not depend on it.
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Print a JSON report instead of text.
    #[arg(long)]
    json: bool,
    /// Include measured runtimes in JSON output (zero otherwise, so that
    /// repeated runs are byte-identical).
    #[arg(long)]
    timings: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StrategyArg {
    Any,
    Ferry,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ErrorModelArg {
    Deterministic,
    Nondet,
}

#[derive(Debug, Subcommand)]
enum Scenario {
    /// Bridge crossing: verify `__timing__ < D` and `__timing__ >= D`.
    Bridge {
        /// Crossing times, ascending.
        #[arg(long, value_delimiter = ',', default_value = "5,10,20,25")]
        times: Vec<u64>,
        #[arg(long, default_value_t = 60)]
        deadline: u64,
        #[arg(long, value_enum, default_value_t = StrategyArg::Any)]
        strategy: StrategyArg,
        /// Write the generated programs here.
        #[arg(long, value_name = "DIR")]
        emit_dir: Option<PathBuf>,
        #[command(flatten)]
        bounds: BoundArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Pulse oximeter: one verification per checksum-error rate.
    Oximeter {
        /// Error rates as fractions, percentages or ratios (`0.25`, `25%`, `1/4`).
        #[arg(long, value_delimiter = ',', default_value = "0,0.166,0.20,0.25,0.333,0.50,1.0")]
        rates: Vec<String>,
        #[arg(long, value_enum, default_value_t = ErrorModelArg::Deterministic)]
        error_model: ErrorModelArg,
        /// Do not re-read a frame after a checksum error.
        #[arg(long)]
        no_retry: bool,
        /// Bad frames also raise a status error.
        #[arg(long)]
        status_errors: bool,
        #[arg(long, default_value_t = 1_000_000)]
        deadline: u64,
        #[arg(long, value_name = "DIR")]
        emit_dir: Option<PathBuf>,
        #[command(flatten)]
        bounds: BoundArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match commands::run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("ctimer: {e:#}");
            ExitCode::from(2)
        }
    }
}
