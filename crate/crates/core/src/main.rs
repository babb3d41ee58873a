use std::fs::File;
use std::io::{self, BufWriter};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use plauth::harness::{run_attack_sweep, run_auth_sweep, run_bounds, run_calibrate, ExperimentConfig, Table};
use plauth::{Error, Result};

/// Physical-layer tag authentication experiments.
#[derive(Parser)]
#[command(name = "plauth", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Detection and false-alarm rates against the sphere-packing bound.
    AuthSweep(Common),
    /// Exhaustive key recovery or impersonation per sweep point.
    AttackSweep(Common),
    /// Capacity and sphere-packing bound table.
    Bounds(Common),
    /// Calibrated detector thresholds.
    Calibrate(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Overrides `master_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `trials`.
    #[arg(long)]
    trials: Option<u64>,
    /// Overrides `workers`.
    #[arg(long)]
    workers: Option<usize>,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::from_path(&self.config)?;
        if let Some(seed) = self.seed {
            cfg.master_seed = seed;
        }
        if let Some(trials) = self.trials {
            if trials == 0 {
                return Err(Error::Config {
                    line: 0,
                    field: "trials".into(),
                    message: "--trials must be at least 1".into(),
                });
            }
            cfg.trials = trials;
        }
        if let Some(workers) = self.workers {
            cfg.workers = workers;
        }
        Ok(cfg)
    }

    fn emit(&self, table: &Table) -> Result<()> {
        match &self.out {
            Some(path) => {
                let file = File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
                table.write_csv(BufWriter::new(file))
            }
            None => table.write_csv(io::stdout().lock()),
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let (common, op): (&Common, fn(&ExperimentConfig) -> Result<Table>) = match &cli.command {
        Command::AuthSweep(c) => (c, run_auth_sweep),
        Command::AttackSweep(c) => (c, run_attack_sweep),
        Command::Bounds(c) => (c, run_bounds),
        Command::Calibrate(c) => (c, run_calibrate),
    };
    let cfg = common.load()?;
    let table = op(&cfg)?;
    common.emit(&table)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
