//! `damlab`: runs the experiments and writes plot-ready CSV files.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Ctx, Failure};
use config::{Overrides, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "damlab", version, about = "Pointer measurements of a thermally damped qubit")]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads, 0 for one per core.
    #[arg(long, global = true, env = "DAMLAB_THREADS", default_value_t = 0)]
    threads: usize,
    /// Treat invariant warnings as failures.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Steady state and gap over θ.
    Steady(Overrides),
    /// Reading densities for a list of coupling times.
    PointerDist(Overrides),
    /// Deviation sweeps and threshold crossings.
    Fig2(Overrides),
    /// POVM elements from all four constructions.
    Povm(Overrides),
    /// Classical and quantum Fisher information tables.
    Fisher(Overrides),
    /// Monte Carlo estimator variances.
    Estimate(Overrides),
    /// Rows where the classical bound drops below the quantum one.
    Violate(Overrides),
    /// QFI of random probes against the steady-state bound.
    AppendixB(Overrides),
    /// Resonator readout sweep and crossings.
    Cqed(Overrides),
    /// Every acceptance check.
    ReproduceAll(Overrides),
}

impl Command {
    fn parts(&self) -> (&'static str, &Overrides) {
        match self {
            Command::Steady(o) => ("steady", o),
            Command::PointerDist(o) => ("pointer-dist", o),
            Command::Fig2(o) => ("fig2", o),
            Command::Povm(o) => ("povm", o),
            Command::Fisher(o) => ("fisher", o),
            Command::Estimate(o) => ("estimate", o),
            Command::Violate(o) => ("violate", o),
            Command::AppendixB(o) => ("appendix-b", o),
            Command::Cqed(o) => ("cqed", o),
            Command::ReproduceAll(o) => ("reproduce-all", o),
        }
    }
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    let (name, overrides) = cli.command.parts();
    let file = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let cfg = file.resolve(name, overrides, cli.seed)?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
        .map_err(|e| Failure::Config(e.into()))?;
    let ctx = Ctx { cfg, strict: cli.strict };
    let tables = commands::run(name, &ctx)?;
    let hash = ctx.cfg.hash();
    for t in tables {
        let bytes = t.render(name, &hash, ctx.cfg.seed())?;
        output::write_atomic(&cli.out, &t.file_name(), &bytes)?;
        println!("{}", cli.out.join(t.file_name()).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("configuration error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Invariant(what)) => {
            eprintln!("numerical invariant failed: {what}");
            ExitCode::from(3)
        }
    }
}
