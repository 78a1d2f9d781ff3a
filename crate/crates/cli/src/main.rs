//! `adsv`: derive channel laws, tabulate densities, estimate error rates
//! and search binary splits. Results are CSV with `#` metadata lines.

mod commands;
mod config;
mod error;

use clap::{Args, Parser, Subcommand};
use config::{resolve_channel, ExperimentConfig};
use error::{CliError, Result};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "adsv", version, about = "Sample-variance detection experiments for diffusion channels with drift")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ChannelArgs {
    /// Channel preset: capillary or svc.
    #[arg(long)]
    channel: Option<String>,
    /// Distance (um).
    #[arg(long)]
    d: Option<f64>,
    /// Drift velocity (um/s).
    #[arg(long)]
    v: Option<f64>,
    /// Diffusion coefficient (um^2/s).
    #[arg(long = "D")]
    diffusion: Option<f64>,
}

impl ChannelArgs {
    fn resolve(&self) -> Result<(Option<String>, adsv::channel::ChannelParams)> {
        resolve_channel(self.channel.as_deref(), self.d, self.v, self.diffusion)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print mean, variance and skewness of the propagation time.
    Derive {
        /// Channel preset: capillary or svc.
        preset: Option<String>,
        #[arg(long)]
        d: Option<f64>,
        #[arg(long)]
        v: Option<f64>,
        #[arg(long = "D")]
        diffusion: Option<f64>,
        /// Skewness below which the normal approximation is flagged as sound.
        #[arg(long, default_value_t = adsv::channel::DEFAULT_NORMAL_SKEW_LIMIT)]
        skew_limit: f64,
    },
    /// Tabulate the conditional densities of the statistic.
    Pdf {
        /// Release counts, rows separated by ';', e.g. "4,0;2,2;0,4".
        #[arg(long)]
        rows: String,
        /// Slot spacing (s).
        #[arg(long, default_value_t = 0.1)]
        te: f64,
        #[command(flatten)]
        channel: ChannelArgs,
        /// Number of observed molecules.
        #[arg(long)]
        m: Option<u32>,
        /// Use the molecule-loss mixture for M observed molecules.
        #[arg(long)]
        noisy: bool,
        /// start:stop:count or a comma-separated list of z values.
        #[arg(long)]
        grid: String,
    },
    /// Monte Carlo and theoretical error rates from a key=value config.
    Ber {
        config: PathBuf,
    },
    /// Best binary split (N0, N1) for each N.
    Optimize {
        #[arg(long = "N", value_delimiter = ',', default_values_t = [2u32, 4, 8, 16])]
        n: Vec<u32>,
        #[command(flatten)]
        channel: ChannelArgs,
        #[arg(long, default_value_t = 0.1)]
        te: f64,
        #[arg(long, default_value_t = 0.0)]
        pd: f64,
    },
}

fn read(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn run(cli: Cli) -> Result<()> {
    let text = match cli.command {
        Command::Derive { preset, d, v, diffusion, skew_limit } => {
            if preset.is_some() && (d.is_some() || v.is_some() || diffusion.is_some()) {
                return Err(CliError::Usage("give either a preset or --d --v --D".into()));
            }
            let (preset, params) = resolve_channel(preset.as_deref(), d, v, diffusion)?;
            commands::derive(&preset, &params, skew_limit)
        }
        Command::Pdf { rows, te, channel, m, noisy, grid } => {
            let (preset, channel) = channel.resolve()?;
            commands::pdf(&commands::PdfRequest { rows: &rows, t_e: te, preset, channel, m, noisy, grid: &grid })?
        }
        Command::Ber { config } => {
            let cfg = ExperimentConfig::parse(&read(&config)?)?;
            let text = commands::ber(&cfg)?;
            if let Some(out) = &cfg.out {
                std::fs::write(out, &text).map_err(|source| CliError::Io { path: out.clone(), source })?;
                return Ok(());
            }
            text
        }
        Command::Optimize { n, channel, te, pd } => {
            let (preset, channel) = channel.resolve()?;
            commands::optimize(&n, &preset, &channel, te, pd)?
        }
    };
    print!("{text}");
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
