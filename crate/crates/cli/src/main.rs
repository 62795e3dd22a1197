use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use khlab::{Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "khlab", version, about = "k-Hessian exterior problems: solves, Φ series and identity checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Run configuration (`key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Run a single identity suite.
    #[arg(long, global = true)]
    suite: Option<String>,

    /// Samples per case of the identity suites.
    #[arg(long, global = true)]
    samples: Option<usize>,

    /// Comma-separated β values; fractions such as `1/3` are accepted.
    #[arg(long, global = true, allow_hyphen_values = true)]
    beta: Option<String>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Randomized identity suites; exit status 0 iff all pass.
    VerifyIdentities,
    /// Continuation solve: field dump, report JSON and ray CSV.
    Solve,
    /// Φ series and the boundary inequality for each β.
    Minkowski,
    /// Tables of the barrier family and f_ε.
    BarriersTable,
}

fn run(cli: &Cli) -> khlab::Result<bool> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    cfg.apply(&Overrides {
        out: cli.out.clone(),
        seed: cli.seed,
        suite: cli.suite.clone(),
        samples: cli.samples,
        betas: cli.beta.clone(),
    })?;
    match cli.command {
        Command::VerifyIdentities => {
            let out = khlab::cmd_verify_identities(&cfg)?;
            for s in &out.suites {
                println!(
                    "{:<18} {}  min margin {:.3e}",
                    s.suite,
                    if s.passed { "pass" } else { "FAIL" },
                    s.min_margin
                );
            }
            for f in &out.failures {
                println!("failing samples written to {}", f.display());
            }
            println!("summary: {}", out.summary.display());
            Ok(out.passed)
        }
        Command::Solve => {
            let out = khlab::cmd_solve(&cfg)?;
            let r = &out.body.report;
            println!(
                "converged in {} iterations, residual {:.3e}, γ ≈ {:.6}",
                r.iterations, r.final_residual, r.asymptotics.gamma.affine
            );
            println!("wrote {}, {}, {}", out.dump.display(), out.report.display(), out.rays.display());
            Ok(true)
        }
        Command::Minkowski => {
            let out = khlab::cmd_minkowski(&cfg)?;
            for r in &out.results {
                println!(
                    "β = {:.6}: lhs {:.6e}, rhs {:.6e}, rel gap {:+.3e}, monotone {}, equality {}",
                    r.beta,
                    r.inequality.lhs,
                    r.inequality.rhs,
                    r.inequality.rel_gap,
                    r.series.monotone,
                    r.inequality.equality
                );
            }
            Ok(true)
        }
        Command::BarriersTable => {
            let out = khlab::cmd_barriers_table(&cfg)?;
            println!("wrote {} rows to {}", out.rows, out.csv.display());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
