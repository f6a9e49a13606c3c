mod commands;
mod config;
mod output;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use config::Config;

/// Segmentation overhead analysis and input-buffered switch simulation.
#[derive(Debug, Parser)]
#[command(name = "cellseg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Mean queue length and required speed-up for exponential packet lengths.
    Analyze(Common),
    /// Quantized pmf and moments of a service-time distribution.
    Quantize(Common),
    /// One switch simulation run.
    Simulate(Common),
    /// Simulations over a utilization x speed-up grid.
    Sweep(Common),
    /// Smallest speed-up that keeps the switch stable.
    MinSpeedup(Common),
    /// Write a synthetic packet stream in trace format.
    GenTraffic(Common),
    /// List configuration keys with their defaults.
    Keys,
}

#[derive(Debug, Args)]
struct Common {
    /// Configuration file (`key = value` lines).
    config: Option<PathBuf>,
    /// Override a configuration key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Override the seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Print scheduler state and extra diagnostics to stderr.
    #[arg(short, long)]
    verbose: bool,
}

impl Common {
    fn load(&self) -> Result<Config> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                Config::parse(&text).with_context(|| format!("in {}", path.display()))?
            }
            None => Config::default(),
        };
        for o in &self.overrides {
            cfg.set(o)?;
        }
        if let Some(seed) = self.seed {
            cfg.set(&format!("seed={seed}"))?;
        }
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<()> {
    let (name, common) = match &cli.command {
        Command::Analyze(c) => ("analyze", c),
        Command::Quantize(c) => ("quantize", c),
        Command::Simulate(c) => ("simulate", c),
        Command::Sweep(c) => ("sweep", c),
        Command::MinSpeedup(c) => ("min-speedup", c),
        Command::GenTraffic(c) => ("gen-traffic", c),
        Command::Keys => {
            for (key, default, help) in config::KEYS {
                println!("{key} = {default}  # {help}");
            }
            return Ok(());
        }
    };
    let cfg = common.load()?;
    let out = match &cli.command {
        Command::Analyze(_) => commands::analyze(&cfg),
        Command::Quantize(_) => commands::quantize(&cfg),
        Command::Simulate(c) => commands::simulate(&cfg, c.verbose),
        Command::Sweep(_) => commands::sweep(&cfg),
        Command::MinSpeedup(_) => commands::min_speedup(&cfg),
        Command::GenTraffic(_) => commands::gen_traffic(&cfg),
        Command::Keys => unreachable!(),
    }
    .with_context(|| format!("{name} failed"))?;

    let mut text = format!("# cellseg {name}\n");
    text.push_str(&cfg.comment_block());
    for note in &out.notes {
        text.push_str(&format!("# {note}\n"));
    }
    text.push_str(&out.body);
    output::emit(common.output.as_deref(), text.as_bytes())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
