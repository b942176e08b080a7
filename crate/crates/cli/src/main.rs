use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dirnet_cli::commands::{self, Mode};
use dirnet_cli::{CliError, Result, Scenario};

#[derive(Parser)]
#[command(
    name = "dirnet",
    version,
    about = "Minimum-cost routing of correlated sources to multiple sinks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimum total communication cost of a scenario.
    Cost {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        /// Only allow packets addressed to sinks that request the source.
        #[arg(long)]
        no_helpers: bool,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Write the rate-region constraints as CSV.
    Region {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long)]
        no_helpers: bool,
        /// Output file; standard output if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo block error rate of power binning.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        /// Blocklength.
        #[arg(long)]
        n: usize,
        /// Packet rates in bits per symbol, e.g. `0:12=0.6,0:1=0.1`.
        #[arg(long)]
        rates: String,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Grid search over the helper auxiliaries.
    HelperSweep {
        #[arg(long)]
        p1: f64,
        #[arg(long)]
        p2: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 200)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn open(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| CliError::Io {
            path: p.display().to_string(),
            source: e,
        })?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Cost {
            scenario,
            mode,
            no_helpers,
            json,
        } => {
            let scn = Scenario::load(&scenario)?;
            let report = commands::cost(&scn, mode, no_helpers)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            } else {
                print!("{}", report.to_text());
            }
        }
        Command::Region {
            scenario,
            mode,
            no_helpers,
            out,
        } => {
            let scn = Scenario::load(&scenario)?;
            let problem = commands::build_problem(&scn, mode, no_helpers)?;
            commands::region_csv(&problem.region, open(out.as_deref())?)?;
        }
        Command::Simulate {
            scenario,
            n,
            rates,
            trials,
            seed,
            out,
        } => {
            let scn = Scenario::load(&scenario)?;
            let rates = commands::parse_rates(&rates)?;
            let report = commands::simulate(&scn, n, rates, trials, seed)?;
            if out.is_some() {
                print!("{}", commands::simulate_text(&report));
            }
            commands::simulate_csv(&report, open(out.as_deref())?)?;
        }
        Command::HelperSweep {
            p1,
            p2,
            delta,
            grid,
            out,
        } => {
            let sweep = commands::helper_sweep_run(p1, p2, delta, grid)?;
            if out.is_some() {
                print!("{}", sweep.text);
            }
            commands::helper_sweep_csv(&sweep.rows, open(out.as_deref())?)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
