use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use conelab_cli::{resolve_out, run_file, Command, RunOptions, Verdict};

/// Numerical checks for three-circles theorems on model manifolds.
#[derive(Debug, Parser)]
#[command(name = "conelab", version)]
struct Args {
    command: Command,

    /// Scenario file (JSON).
    #[arg(long)]
    config: PathBuf,

    /// Output directory; CONELAB_OUT takes precedence.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Scan grid density, points per decade.
    #[arg(long)]
    grid_per_decade: Option<usize>,

    /// Primary tolerance of the command.
    #[arg(long)]
    tol: Option<f64>,

    /// Use the 2^{4n} windows of the frequency lemmas instead of 4.
    #[arg(long)]
    paper_factors: bool,

    #[arg(long, default_value_t = conelab_cli::suites::DEFAULT_SEED)]
    seed: u64,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let options = RunOptions {
        out: resolve_out(args.out, std::env::var_os("CONELAB_OUT").map(PathBuf::from)),
        grid_per_decade: args.grid_per_decade,
        tol: args.tol,
        paper_factors: args.paper_factors,
        seed: args.seed,
    };
    match run_file(args.command, &args.config, &options) {
        Ok(manifest) => {
            for c in &manifest.checks {
                let tag = match c.verdict {
                    Verdict::Pass => "pass",
                    Verdict::Fail => "FAIL",
                    Verdict::Skipped => "skip",
                    Verdict::PreconditionFailed => "PRECONDITION",
                };
                println!("{tag:>12}  {:<26} {}", c.name, c.detail);
            }
            for o in &manifest.outputs {
                println!("{:>12}  {}", "wrote", o.path);
            }
            ExitCode::from(manifest.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
