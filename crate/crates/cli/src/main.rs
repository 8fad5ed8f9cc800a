//! `usdegrade` command-line tool.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{AugmentArgs, DegradeArgs, LadderArgs, MetricsArgs, NllrArgs, PairsArgs, ProfileArgs};

#[derive(Debug, Parser)]
#[command(name = "usdegrade", version, about = "Ultrasound degradation, NLLR targets and restoration metrics")]
struct Cli {
    /// JSON document whose keys override the command-line flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads: a positive count or "auto". US_DEGRADE_THREADS overrides it.
    #[arg(long, global = true)]
    threads: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Corrupt one image with fixed operators or a drawn training composition.
    Degrade(DegradeArgs),
    /// Resize, rotate and crop one image with seed-drawn parameters.
    Augment(AugmentArgs),
    /// Denoise one image with non-local low-rank shrinkage.
    Nllr(NllrArgs),
    /// PSNR and SSIM of a test image against a reference.
    Metrics(MetricsArgs),
    /// Resolution metrics of an ROI intensity profile.
    Profile(ProfileArgs),
    /// Severity ladder over an image directory.
    Ladder(LadderArgs),
    /// Paired degraded/target training data from an image directory.
    Pairs(PairsArgs),
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl From<usdegrade::Error> for CliError {
    fn from(e: usdegrade::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let name = match &cli.command {
        Command::Degrade(_) => "degrade",
        Command::Augment(_) => "augment",
        Command::Nllr(_) => "nllr",
        Command::Metrics(_) => "metrics",
        Command::Profile(_) => "profile",
        Command::Ladder(_) => "ladder",
        Command::Pairs(_) => "pairs",
    };
    let file = match &cli.config {
        Some(path) => config::ConfigFile::load(path, name)?,
        None => config::ConfigFile::default(),
    };
    let threads = config::resolve_threads(file.threads.as_deref().or(cli.threads.as_deref()))?;
    config::init_threads(&threads)?;
    let ctx = commands::Run { name, threads: &threads };
    match cli.command {
        Command::Degrade(a) => commands::degrade(&ctx, file.apply(&a)?),
        Command::Augment(a) => commands::augment(&ctx, file.apply(&a)?),
        Command::Nllr(a) => commands::nllr(&ctx, file.apply(&a)?),
        Command::Metrics(a) => commands::metrics(&ctx, file.apply(&a)?),
        Command::Profile(a) => commands::profile(&ctx, file.apply(&a)?),
        Command::Ladder(a) => commands::ladder(&ctx, file.apply(&a)?),
        Command::Pairs(a) => commands::pairs(&ctx, file.apply(&a)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
