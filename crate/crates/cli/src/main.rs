use std::path::{Path, PathBuf};

use anyhow::Result;
use clap::{Parser, Subcommand, ValueEnum};
use kgpml::runner;
use kgpml::RunFile;
use kgpml_core::experiment::ConvergenceAxis;

#[derive(Parser)]
#[command(name = "kgpml", version, about = "Klein-Gordon PML experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output directory (default: the config's `out`, else `out`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Accepted for compatibility; every run is deterministic.
    #[arg(long, global = true)]
    seedless: bool,
    /// Allow complex R and record the max|u| history instead of errors.
    #[arg(long, global = true)]
    demo_stability: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Single run: error and energy series.
    Run { config: PathBuf },
    /// Self-convergence study along one axis.
    Converge {
        config: PathBuf,
        #[arg(long, value_enum)]
        axis: Axis,
        #[arg(long, default_value_t = 4)]
        levels: usize,
    },
    /// Final-time errors over the `[[sweep]]` grid.
    Sweep {
        config: PathBuf,
        /// Evaluate points one at a time.
        #[arg(long)]
        serial: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Axis {
    Tau,
    H,
}

fn load(cli: &Cli, path: &Path) -> Result<(RunFile, PathBuf)> {
    let mut file = RunFile::load(path)?;
    if cli.demo_stability {
        file.solver.demo_stability = true;
    }
    let dir = cli.out.clone().or_else(|| file.out.clone()).unwrap_or_else(|| "out".into());
    Ok((file, dir))
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let manifest = match &cli.command {
        Command::Run { config } => {
            let (file, dir) = load(&cli, config)?;
            runner::run_single(&file, &dir)?
        }
        Command::Converge { config, axis, levels } => {
            let (file, dir) = load(&cli, config)?;
            let axis = match axis {
                Axis::Tau => ConvergenceAxis::Tau,
                Axis::H => ConvergenceAxis::Mesh,
            };
            runner::run_converge(&file, axis, *levels, &dir)?
        }
        Command::Sweep { config, serial } => {
            let (file, dir) = load(&cli, config)?;
            runner::run_sweep(&file, &dir, !serial)?
        }
    };
    for f in &manifest.files {
        println!("{}", f.display());
    }
    if manifest.reference_contaminated {
        eprintln!("warning: reference solution reached the enlarged boundary; errors are unreliable");
    }
    Ok(())
}
