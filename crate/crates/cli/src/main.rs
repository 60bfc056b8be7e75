use std::path::PathBuf;
use std::process::ExitCode;

use clap::builder::PossibleValuesParser;
use clap::{Parser, Subcommand};

use sumrate::io::{
    generate_instance, load_scenario, report_to_string, run_bounds, run_oracle, run_relax, run_solve,
    scenario_to_string, Algorithm, GenParams,
};
use sumrate::solvers::OracleOptions;
use sumrate::{Error, RelaxMatrix};

#[derive(Parser)]
#[command(
    name = "sumrate",
    version,
    about = "Weighted sum-rate power control for interference channels"
)]
struct Cli {
    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Maximize the weighted sum rate.
    Solve {
        #[arg(long)]
        scenario: PathBuf,
        /// Defaults to the scenario's solver setting.
        #[arg(long, value_parser = PossibleValuesParser::new(Algorithm::NAMES))]
        algorithm: Option<String>,
        /// Also run the grid oracle (at most 4 power slots).
        #[arg(long)]
        oracle_check: bool,
    },
    /// Closed-form lower and upper bounds.
    Bounds {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Solve a log-SIR relaxation.
    Relax {
        #[arg(long)]
        scenario: PathBuf,
        /// tilde, noiseless, or cap:<budget index>
        #[arg(long, default_value = "tilde")]
        variant: String,
    },
    /// Exhaustive grid search.
    Oracle {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 201)]
        resolution: usize,
    },
    /// Write a random scenario.
    Gen {
        #[arg(long)]
        users: usize,
        #[arg(long, default_value_t = 1)]
        tones: usize,
        #[arg(long)]
        seed: u64,
    },
}

enum Failure {
    Usage(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let text = match cli.command {
        Cmd::Solve {
            scenario,
            algorithm,
            oracle_check,
        } => {
            let sc = load_scenario(scenario)?;
            let algorithm = algorithm.map(|a| a.parse::<Algorithm>()).transpose()?;
            let oracle = oracle_check.then(OracleOptions::default);
            report_to_string(&run_solve(&sc, algorithm, oracle.as_ref())?)?
        }
        Cmd::Bounds { scenario } => report_to_string(&run_bounds(&load_scenario(scenario)?)?)?,
        Cmd::Relax { scenario, variant } => {
            let which: RelaxMatrix = variant.parse().map_err(|e: Error| Failure::Usage(e.to_string()))?;
            report_to_string(&run_relax(&load_scenario(scenario)?, which)?)?
        }
        Cmd::Oracle { scenario, resolution } => {
            let opts = OracleOptions {
                resolution,
                ..Default::default()
            };
            report_to_string(&run_oracle(&load_scenario(scenario)?, &opts)?)?
        }
        Cmd::Gen { users, tones, seed } => {
            scenario_to_string(&generate_instance(users, tones, seed, &GenParams::default())?)?
        }
    };
    match cli.out {
        Some(path) => std::fs::write(path, text).map_err(Error::from)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            if e.is_infeasibility() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
