use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use shearmix::harness::{run_experiment, Experiment, ExitStatus, ExperimentConfig, GridChoice};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    TransportGrowth,
    DissipationSweep,
    FbVerify,
    Figure1Frames,
    RegularityTheorem2,
    Schedule,
}

impl From<Command> for Experiment {
    fn from(c: Command) -> Self {
        match c {
            Command::TransportGrowth => Experiment::TransportGrowth,
            Command::DissipationSweep => Experiment::DissipationSweep,
            Command::FbVerify => Experiment::FbVerify,
            Command::Figure1Frames => Experiment::Figure1Frames,
            Command::RegularityTheorem2 => Experiment::RegularityTheorem2,
            Command::Schedule => Experiment::Schedule,
        }
    }
}

/// Passive-scalar mixing experiments under alternating sawtooth shears.
#[derive(Debug, Parser)]
#[command(version)]
struct Cli {
    /// Experiment to run.
    #[arg(value_enum)]
    experiment: Command,
    /// Flat `key = value` config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Grid size (power of two) or `auto`.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    jmax: Option<usize>,
    /// Comma-separated diffusivities.
    #[arg(long)]
    kappa: Option<String>,
    /// Time profile: flat or bump.
    #[arg(long)]
    profile: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
}

fn config(cli: &Cli) -> shearmix::Result<ExperimentConfig> {
    let experiment = Experiment::from(cli.experiment);
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path, Some(experiment))?,
        None => ExperimentConfig::new(experiment),
    };
    let overrides = [
        ("grid", cli.grid.clone()),
        ("j_max", cli.jmax.map(|j| j.to_string())),
        ("kappa", cli.kappa.clone()),
        ("profile", cli.profile.clone()),
        ("seed", cli.seed.map(|s| s.to_string())),
        ("workers", cli.workers.map(|w| w.to_string())),
    ];
    for (key, value) in overrides {
        if let Some(v) = value {
            cfg.set(key, &v).map_err(shearmix::Error::Setting)?;
        }
    }
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(ExitStatus::Failure.code() as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let cfg = match config(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(ExitStatus::Failure.code() as u8);
        }
    };
    let grid = match cfg.grid {
        GridChoice::Auto => "auto".to_string(),
        GridChoice::Fixed(n) => n.to_string(),
    };
    println!("{} (grid {grid}, out {})", cfg.experiment, cfg.out.display());
    let outcome = match run_experiment(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(ExitStatus::Failure.code() as u8);
        }
    };
    if let Some(n) = outcome.n {
        println!("n = {n}");
    }
    for note in &outcome.notes {
        println!("note: {note}");
    }
    for check in &outcome.checks {
        println!("{check}");
    }
    for path in &outcome.artifacts {
        println!("wrote {}", path.display());
    }
    let status = outcome.status();
    if status == ExitStatus::Unresolved {
        eprintln!("no schedule step was resolved on this grid");
    }
    ExitCode::from(status.code() as u8)
}
