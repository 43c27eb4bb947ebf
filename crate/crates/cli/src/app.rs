use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::commands::{self, Ctx};
use crate::config::{self, ConfigError, LoadedConfig};
use crate::error::CliError;
use crate::output::RunDir;

#[derive(Debug, Parser)]
#[command(name = "qthermo", version, about = "Qubit thermometry with HEOM and Bloch-Redfield dynamics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Overrides the `seed` key of the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: available cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Optimizer checkpoint to continue from.
    #[arg(long, global = true)]
    pub resume: Option<PathBuf>,
    /// Also render SVG plots next to the CSV files.
    #[arg(long, global = true)]
    pub plot: bool,
    /// Stop the optimizer after this many iterations (checkpoint testing).
    #[arg(long, global = true, hide = true)]
    pub stop_after: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// QSNR and Bloch trajectories, one CSV per parameter point.
    Dynamics,
    /// Steady-state QSNR against the Gibbs benchmark.
    Steady,
    /// Optimal and final QSNR (and optionally BLP) over a parameter grid.
    Sweep,
    /// Trace-distance dynamics and BLP measure for the state-pair library.
    Blp,
    /// Swarm optimisation of piecewise-constant controls.
    Optimize,
    /// Closed-form Gibbs-qubit QSNR over a temperature grid.
    BenchmarkThermal,
    /// HEOM and Bloch-Redfield Bloch trajectories side by side.
    CompareBrme,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Dynamics => "dynamics",
            Command::Steady => "steady",
            Command::Sweep => "sweep",
            Command::Blp => "blp",
            Command::Optimize => "optimize",
            Command::BenchmarkThermal => "benchmark-thermal",
            Command::CompareBrme => "compare-brme",
        }
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let loaded: Option<LoadedConfig> = cli.config.as_deref().map(config::load).transpose()?;
    if loaded.is_none() && cli.command != Command::BenchmarkThermal {
        return Err(ConfigError::new("--config", format!("`{}` needs a config file", cli.command.name())).into());
    }
    if cli.resume.is_some() && cli.command != Command::Optimize {
        return Err(ConfigError::new("--resume", "only `optimize` can resume from a checkpoint").into());
    }
    let seed = cli.seed.or(loaded.as_ref().and_then(|l| l.config.seed));
    let snapshot = loaded.as_ref().map_or(serde_json::Value::Null, |l| l.snapshot.clone());
    let fingerprint = commands::fingerprint(&snapshot);

    let mut run = RunDir::create(&cli.out, cli.command.name(), seed, cli.config.as_deref(), snapshot)?;
    let result = {
        let mut ctx = Ctx {
            cfg: loaded.as_ref().map(|l| &l.config),
            run: &mut run,
            plot: cli.plot,
            seed: seed.unwrap_or(0),
            resume: cli.resume.as_deref(),
            stop_after: cli.stop_after,
            fingerprint,
        };
        match cli.command {
            Command::Dynamics => commands::dynamics(&mut ctx),
            Command::Steady => commands::steady(&mut ctx),
            Command::Sweep => commands::sweep(&mut ctx),
            Command::Blp => commands::blp(&mut ctx),
            Command::Optimize => commands::optimize(&mut ctx),
            Command::BenchmarkThermal => commands::benchmark_thermal(&mut ctx),
            Command::CompareBrme => commands::compare_brme(&mut ctx),
        }
    };
    run.finish(result.as_ref().err().map(|e| e.to_string()))?;
    result
}
