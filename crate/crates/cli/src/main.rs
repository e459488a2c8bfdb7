//! `jcurves`: batch runner for structure checks, curve solves and dilation audits.

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{RunContext, Outcome};

#[derive(Debug, Parser)]
#[command(name = "jcurves", version, about = "J-holomorphic curves for almost complex structures near the standard one")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output.directory`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for parallel kernels.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for the sample generators (overrides `seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Recompute weighted Hölder norms at every iteration.
    #[arg(long, global = true)]
    strict_norm: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate the structure and report decay, Levi and integrability diagnostics.
    Check,
    /// Solve the J-holomorphic line asymptotic to `zeta v`.
    SolveLine {
        /// Direction as comma-separated reals `re1,im1,...`; defaults to e1.
        #[arg(long, allow_hyphen_values = true)]
        v: Option<String>,
    },
    /// Solve the disc through `(a, 0)`.
    SolveDisc {
        /// Center in C^(n-1) as comma-separated reals; defaults to 0.
        #[arg(long, allow_hyphen_values = true)]
        a: Option<String>,
    },
    /// Find a line through the point `p` with |p| > 1.
    Cover {
        #[arg(long, allow_hyphen_values = true)]
        p: String,
    },
    /// Solve discs over a lattice of centers and measure their separation.
    Foliate {
        #[arg(long, default_value_t = 5)]
        lattice: usize,
        #[arg(long, default_value_t = 0.5)]
        spread: f64,
    },
    /// Audit the rescaled decay bounds for each dilation factor.
    DilateScan {
        #[arg(long, default_value = "1,0.5,0.1")]
        epsilons: String,
    },
}

const EXIT_CONFIG: u8 = 2;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let Some(config_path) = cli.config.as_ref() else {
        eprintln!("error: --config PATH is required");
        return ExitCode::from(EXIT_CONFIG);
    };
    let cfg = match config::load(config_path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global() {
            eprintln!("warning: could not size the thread pool: {e}");
        }
    }
    let ctx = RunContext {
        out: manifest::out_dir(&cfg.config.output.directory, cli.out.as_deref()),
        seed: cli.seed.unwrap_or(cfg.config.seed),
        strict_norm: cli.strict_norm,
        cfg,
    };
    let result = match &cli.command {
        Command::Check => commands::check(&ctx),
        Command::SolveLine { v } => commands::solve_line(&ctx, v.as_deref()),
        Command::SolveDisc { a } => commands::solve_disc_cmd(&ctx, a.as_deref()),
        Command::Cover { p } => commands::cover(&ctx, p),
        Command::Foliate { lattice, spread } => commands::foliate(&ctx, *lattice, *spread),
        Command::DilateScan { epsilons } => commands::dilate_scan(&ctx, epsilons),
    };
    match result {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(o) => {
            match &o {
                Outcome::NotConverged(m) | Outcome::OutOfRegion(m) | Outcome::Failed(m) => eprintln!("error: {m}"),
                Outcome::Success => {}
            }
            ExitCode::from(o.code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<commands::UsageError>().is_some() {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
