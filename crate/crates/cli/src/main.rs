use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use spinbeam_cli::{execute, CliError, ConfigError, MethodChoice, Mode, RunConfig};

/// Squeezing spectra, method comparison, beam dynamics and pair runs.
#[derive(Debug, Parser)]
#[command(name = "spinbeam", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML config; without it the built-in defaults are used.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides `[output] dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Overrides the config `method`.
    #[arg(long, global = true, value_enum)]
    method: Option<MethodChoice>,

    /// Grid override `key=value`, e.g. `--grid d_points=11`; repeatable.
    #[arg(long = "grid", global = true, value_name = "KEY=VALUE")]
    grid: Vec<String>,

    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// r over the (d, kappa) grid.
    Spectrum,
    /// Threshold kappas at the configured detuning.
    Threshold,
    /// Scattering versus closed form, with the M-dependence table.
    Compare,
    /// Time-domain output at a sequence of ramp rates.
    Dynamics,
    /// Pair amplitude and post-selected Bell figures.
    Pairs,
}

impl Command {
    fn mode(self) -> Mode {
        match self {
            Self::Spectrum => Mode::Spectrum,
            Self::Threshold => Mode::Threshold,
            Self::Compare => Mode::Compare,
            Self::Dynamics => Mode::Dynamics,
            Self::Pairs => Mode::Pairs,
        }
    }
}

fn build_config(cli: &Cli) -> Result<RunConfig, ConfigError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(m) = cli.method {
        cfg.method = m;
    }
    if let Some(dir) = &cli.out {
        cfg.output.dir = Some(dir.clone());
    }
    for arg in &cli.grid {
        cfg.grid.set(arg)?;
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<ExitCode, CliError> {
    if let Some(n) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| ConfigError::Field {
                field: "--jobs".into(),
                reason: e.to_string(),
            })?;
    }
    let cfg = build_config(cli)?;
    let outcome = execute(cli.command.mode(), &cfg)?;
    match outcome.tolerance_failure {
        None => {
            println!("wrote {}", outcome.out_dir.display());
            Ok(ExitCode::SUCCESS)
        }
        Some(msg) => {
            eprintln!("tolerance failure: {msg}");
            println!("wrote {}", outcome.out_dir.display());
            Ok(ExitCode::from(3))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
