use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::anyhow;
use clap::{Parser, Subcommand};

mod commands;
mod config;
mod presets;

use commands::Failure;
use config::RunConfig;

#[derive(Parser)]
#[command(name = "dat", version, about = "Noise-assisted transport in quantum networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve one configuration and write its trajectory.
    Run(Args),
    /// p_sink over a grid of dephasing rates or mode dampings.
    Sweep(Args),
    /// Search dephasing rates that maximize p_sink.
    Optimize(Args),
    /// Dark subspace and asymptotic sink population.
    Invariant(Args),
    /// Hybrid-basis pathway report.
    Pathways(Args),
}

#[derive(clap::Args)]
struct Args {
    /// JSON configuration; overlays the preset when both are given.
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Worker threads for sweeps and searches.
    #[arg(long)]
    threads: Option<usize>,
    /// Bundled configuration to start from.
    #[arg(long)]
    preset: Option<String>,
    /// Comma-separated sites that keep their local mode.
    #[arg(long, value_delimiter = ',')]
    modes_subset: Option<Vec<usize>>,
}

impl Args {
    fn load(&self) -> Result<RunConfig, Failure> {
        let mut config = config::load(self.config.as_deref(), self.preset.as_deref()).map_err(Failure::config)?;
        if let Some(sites) = &self.modes_subset {
            match config.modes.as_mut() {
                Some(m) => m.sites = sites.clone(),
                None => return Err(Failure::config(anyhow!("--modes-subset needs a modes block"))),
            }
        }
        Ok(config)
    }
}

fn execute(command: Command) -> Result<(), Failure> {
    let (args, f): (Args, fn(&RunConfig, &std::path::Path) -> Result<(), Failure>) = match command {
        Command::Run(a) => (a, commands::run),
        Command::Sweep(a) => (a, commands::sweep),
        Command::Optimize(a) => (a, commands::optimize),
        Command::Invariant(a) => (a, commands::invariant),
        Command::Pathways(a) => (a, commands::pathways),
    };
    if let Some(k) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| Failure::config(anyhow!("--threads: {e}")))?;
    }
    let config = args.load()?;
    f(&config, &args.out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {:#}", failure.error);
            ExitCode::from(failure.code)
        }
    }
}
