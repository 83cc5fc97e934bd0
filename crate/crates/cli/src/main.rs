use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod error;
mod output;

use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "h2asym", version, about = "Electron-proton asymmetry simulator for XUV-IR dissociation of H2")]
struct Cli {
    /// TOML run configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output.directory`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// RNG seed; overrides `simulation.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write model asymmetry maps, ⟨A⟩(KER) curves and nuclear phases.
    Model,
    /// Generate a synthetic coincidence event file.
    Simulate {
        /// Total number of events; overrides `simulation.events`.
        #[arg(long)]
        events: Option<u64>,
    },
    /// Histogram an event file into spectra, projections and delay scans.
    Analyze {
        /// Event file (.bin or .csv); default `<out>/events.bin`.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Fit the histograms written by `analyze` or `model`.
    Fit {
        /// Directory holding the histograms; default `<out>`.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Run the built-in acceptance checks.
    Selfcheck {
        /// Run only these criteria (repeatable).
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=10))]
        only: Vec<u8>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Data(format!("thread pool: {e}")))?;
    }
    let out_given = cli.out.is_some();
    let ctx = commands::Context::new(cli.config.as_deref(), cli.out, cli.seed)?;
    match cli.command {
        Command::Model => commands::model(&ctx),
        Command::Simulate { events } => commands::simulate(&ctx, events),
        Command::Analyze { input } => commands::analyze(&ctx, input),
        Command::Fit { input } => commands::fit(&ctx, input),
        Command::Selfcheck { only } => commands::selfcheck(&ctx, &only, out_given),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
