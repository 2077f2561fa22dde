//! Command-line front end: one subcommand per experiment.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use toruslab::lab::{self, ExperimentConfig, ExperimentKind};

#[derive(Parser)]
#[command(name = "toruslab", version, about = "Compressible gas experiments on the 2-torus")]
struct Cli {
    /// JSON experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default: the config's output_dir, else ./out/<experiment>).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for the randomized families.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Two branches with converging data and separated solutions.
    Nonuniform,
    /// Sobolev norm of the residue against n.
    ResidueScaling,
    /// Distance from the approximate solution at T against n.
    ErrorScaling,
    /// Propagation of the exact family.
    ExactCheck,
    /// Higher Sobolev norm growth against n.
    HigherNorm,
    /// Commutator, reciprocal, algebra and interpolation checks.
    Inequalities,
}

impl Command {
    fn kind(self) -> ExperimentKind {
        match self {
            Command::Nonuniform => ExperimentKind::Nonuniform,
            Command::ResidueScaling => ExperimentKind::ResidueScaling,
            Command::ErrorScaling => ExperimentKind::ErrorScaling,
            Command::ExactCheck => ExperimentKind::ExactCheck,
            Command::HigherNorm => ExperimentKind::HigherNorm,
            Command::Inequalities => ExperimentKind::Inequalities,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<bool, Box<dyn std::error::Error>> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    }
    let kind = cli.command.kind();
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::for_experiment(kind),
    };
    cfg.experiment = kind;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let dir = cli
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(kind.name()));

    let outcome = lab::run(&cfg)?;
    let files = lab::write_outputs(&cfg, &outcome, &dir)?;
    for c in outcome.checks() {
        println!("{} {} = {:e} (threshold {:e})", if c.pass { "ok  " } else { "FAIL" }, c.name, c.value, c.threshold);
    }
    let pass = outcome.pass();
    println!("{}: {}", kind.name(), if pass { "PASS" } else { "FAIL" });
    println!("wrote {} and {}", files.csv.display(), files.summary.display());
    Ok(pass)
}
