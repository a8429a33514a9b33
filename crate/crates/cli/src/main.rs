//! `cojam`: GDoF curves, finite-SNR bounds, scheme simulation and
//! minimum-distance outage sampling, each written as CSV plus a JSON run
//! manifest.

mod commands;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{BoundsArgs, Common, CurveArgs, Failure, MindistArgs, SimulateArgs};

#[derive(Debug, Parser)]
#[command(name = "cojam", version, about = "Wiretap channel with a cooperative jammer")]
struct Cli {
    /// Worker threads for simulation and sampling.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Secure GDoF with and without the helper, plus the three upper bounds.
    GdofCurve {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        args: CurveArgs,
    },
    /// Finite-SNR secure-rate upper bounds over a list of SNRs.
    Bounds {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        args: BoundsArgs,
    },
    /// Monte Carlo run of the layered scheme.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        args: SimulateArgs,
    },
    /// Sampled fraction of gains with a small joint minimum distance.
    Mindist {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        args: MindistArgs,
    },
}

fn run(cli: Cli) -> Result<std::path::PathBuf, Failure> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Config(format!("--threads: {e}")))?;
    }
    match cli.command {
        Command::GdofCurve { common, args } => commands::gdof_curve(&common, args),
        Command::Bounds { common, args } => commands::bounds(&common, args),
        Command::Simulate { common, args } => commands::simulate(&common, args),
        Command::Mindist { common, args } => commands::mindist(&common, args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(manifest) => {
            println!("{}", manifest.display());
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
