//! Command-line front end: resolve, bounds, transform, check.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use desingular::io::{run, CommandSpec, GammaDoc, JobConfig};

#[derive(Parser)]
#[command(
    name = "desingular",
    about = "Exact chart-by-chart resolution of singularities of marked ideals",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Seed for all sample-point randomness.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Groebner step budget (overridden by AMV_BUDGET_GB_STEPS).
    #[arg(long, global = true, default_value_t = 1_000_000)]
    groebner_budget: u64,
    /// Abort a resolution after this many blow-up years.
    #[arg(long, global = true, default_value_t = 200)]
    year_limit: u32,
    /// Decimal-digit cap for numeric bound evaluation.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    digit_cap: u64,
    /// Include invariant values in the history output.
    #[arg(long, global = true, default_value_t = true)]
    emit_invariants: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Resolve a marked ideal; emit the blow-up history as JSON lines.
    Resolve {
        /// Input document (schema "amv1").
        input: PathBuf,
        /// History output file; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Evaluate the complexity bounds for a data vector.
    Bounds {
        #[command(flatten)]
        gamma: GammaArgs,
        /// Report output file; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Apply one blow-up to a marked ideal and print the result document.
    Transform {
        /// Input document (schema "amv1").
        input: PathBuf,
        /// Centre: inline JSON array or a path to a JSON file.
        #[arg(long)]
        centre: String,
        /// Output document file; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Validate a marked-ideal document and print a per-condition report.
    Check {
        /// Input document (schema "amv1").
        input: PathBuf,
        /// Use more sample points for the sampled conditions.
        #[arg(long)]
        thorough: bool,
    },
}

/// Data vector, either as one JSON object or as individual flags.
#[derive(Args)]
#[group(required = true, multiple = true)]
struct GammaArgs {
    /// The whole vector as JSON: {"r":0,"n":2,"m":1,"d":3,"l":1,"q":1,"mu":1}.
    #[arg(long, conflicts_with_all = ["r", "n", "m", "d", "l", "q", "mu"])]
    gamma: Option<String>,
    #[arg(long)]
    r: Option<u64>,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    m: Option<u64>,
    #[arg(long)]
    d: Option<u64>,
    #[arg(long)]
    l: Option<u64>,
    #[arg(long)]
    q: Option<u64>,
    #[arg(long)]
    mu: Option<u64>,
}

impl GammaArgs {
    fn into_doc(self) -> Result<GammaDoc, String> {
        if let Some(text) = self.gamma {
            return serde_json::from_str(&text)
                .map_err(|e| format!("--gamma JSON invalid: {e}"));
        }
        let need = |v: Option<u64>, name: &str| v.ok_or(format!("missing --{name}"));
        Ok(GammaDoc {
            r: self.r.unwrap_or(0),
            n: need(self.n, "n")?,
            m: need(self.m, "m")?,
            d: need(self.d, "d")?,
            l: need(self.l, "l")?,
            q: self.q.unwrap_or(1),
            mu: need(self.mu, "mu")?,
        })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = match cli.command {
        Command::Resolve { input, output } => CommandSpec::Resolve { input, output },
        Command::Bounds { gamma, output } => match gamma.into_doc() {
            Ok(gamma) => CommandSpec::Bounds { gamma, output },
            Err(msg) => {
                eprintln!("error: {msg}");
                return ExitCode::from(2);
            }
        },
        Command::Transform { input, centre, output } => {
            CommandSpec::Transform { input, centre, output }
        }
        Command::Check { input, thorough } => CommandSpec::Check { input, thorough },
    };
    let cfg = JobConfig {
        command,
        seed: cli.seed,
        groebner_budget: cli.groebner_budget,
        year_limit: cli.year_limit,
        digit_cap: cli.digit_cap,
        emit_invariants: cli.emit_invariants,
    };
    ExitCode::from(run(&cfg) as u8)
}
