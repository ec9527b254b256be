use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use onebit_cli::{complexity_table, list_presets, preset, run_scenario, write_files, CliError, CsvFile, RunOptions, Scenario};

#[derive(Parser)]
#[command(name = "onebit-mcrb", version, about = "Misspecified Cramér-Rao bounds for one-bit quantized estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file.
    Run {
        config: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Run a built-in scenario.
    Preset {
        name: String,
        #[command(flatten)]
        flags: Flags,
    },
    /// Write the operation-count table.
    Complexity {
        #[arg(long, default_value_t = 4096)]
        grid: usize,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// List built-in scenarios.
    List,
}

#[derive(Args)]
struct Flags {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Grid points of the estimator and pseudo-true search.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    qmc_points: Option<usize>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Bivariate factorization instead of quasi-Monte Carlo for colored noise.
    #[arg(long)]
    fast_orthant: bool,
    /// Single worker thread.
    #[arg(long)]
    serial: bool,
}

impl Flags {
    fn options(&self) -> RunOptions {
        RunOptions {
            seed: self.seed,
            trials: self.trials,
            grid: self.grid,
            qmc_points: self.qmc_points,
            fast_orthant: self.fast_orthant,
            threads: self.serial.then_some(1),
        }
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let (scenario, flags) = match cli.command {
        Command::List => {
            for name in list_presets() {
                println!("{name}");
            }
            return Ok(());
        }
        Command::Complexity { grid, out_dir } => {
            let files = [CsvFile { name: "complexity.csv".into(), table: complexity_table(grid)? }];
            for path in write_files(&files, &out_dir)? {
                println!("{}", path.display());
            }
            return Ok(());
        }
        Command::Run { config, flags } => (Scenario::from_toml(&std::fs::read_to_string(config)?)?, flags),
        Command::Preset { name, flags } => (preset(&name)?, flags),
    };
    for path in run_scenario(&scenario, &flags.options(), &flags.out_dir)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
