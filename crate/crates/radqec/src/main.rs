use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use radqec::config::Scenario;

/// Radiation fault injection and decoding experiments on rotated surface
/// codes.
#[derive(Debug, Parser)]
#[command(name = "radqec", version)]
struct Cli {
    #[command(subcommand)]
    scenario: Command,
    /// TOML config merged over the scenario defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Run seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; overrides the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Number of sequences; overrides the config.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Worker threads; overrides the config.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Detection rate and affected ratio across code distances and bases.
    DistanceSweep,
    /// Detection persistence for several impact loci.
    PositionStudy,
    /// Identification time against matching time on random syndromes.
    Overhead,
    /// Logical error of four codes sharing one chip.
    MultiCode,
    /// Logical error of several decoders on the same shot streams.
    DecoderCompare,
}

impl Command {
    fn scenario(self) -> Scenario {
        match self {
            Command::DistanceSweep => Scenario::DistanceSweep,
            Command::PositionStudy => Scenario::PositionStudy,
            Command::Overhead => Scenario::Overhead,
            Command::MultiCode => Scenario::MultiCode,
            Command::DecoderCompare => Scenario::DecoderCompare,
        }
    }
}

fn run(cli: Cli) -> Result<PathBuf> {
    let scenario = cli.scenario.scenario();
    let text = match &cli.config {
        Some(p) => std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        None => String::new(),
    };
    let mut cfg = scenario.config_from_str(&text)?;
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    if let Some(o) = cli.out {
        cfg.out = o;
    }
    if let Some(s) = cli.samples {
        cfg.samples = s;
    }
    if let Some(t) = cli.threads {
        cfg.threads = t;
    }
    radqec::execute(scenario, &cfg)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(manifest) => {
            println!("{}", manifest.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
