use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cdnes_cli::commands;

/// Compressed distributed equilibrium-seeking simulator.
#[derive(Parser)]
#[command(name = "cdnes", version, about, disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one configured experiment and write its trace CSV.
    Run {
        /// Experiment config file (TOML).
        #[arg(long)]
        config: PathBuf,
        /// Override the master seed from the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (default: CDNES_OUT or the current directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the linear-convergence certificate for the configured problem.
    Certify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Use the spectral norm of I - W in the certificate constants
        /// (default: Frobenius).
        #[arg(long)]
        spectral: bool,
    },
    /// Re-run the config once per value of one parameter; write a summary CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// One of: eta, gamma, alpha, bits, k.
        #[arg(long)]
        param: String,
        /// Comma-separated list of values.
        #[arg(long)]
        values: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit the four iteration-axis experiment traces (fig3_*.csv).
    ReproduceFig3 {
        /// Master seed (default 7).
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit the same four traces keyed by cumulative bits (fig4_*.csv).
    ReproduceFig4 {
        /// Master seed (default 7).
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Run { config, seed, out } => commands::cmd_run(config, *seed, out.as_deref()),
        Cmd::Certify { config, out, spectral } => {
            commands::cmd_certify(config, out.as_deref(), *spectral)
        }
        Cmd::Sweep { config, param, values, seed, out } => {
            commands::cmd_sweep(config, param, values, *seed, out.as_deref())
        }
        Cmd::ReproduceFig3 { seed, out } => commands::cmd_reproduce_fig3(*seed, out.as_deref()),
        Cmd::ReproduceFig4 { seed, out } => commands::cmd_reproduce_fig4(*seed, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
