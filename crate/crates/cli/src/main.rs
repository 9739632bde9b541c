mod args;
mod commands;
mod error;

use std::process::ExitCode;

use clap::Parser;
use double_lambda::propagation::IntegratorOptions;

use args::{Cli, Command};
use commands::{Outcome, Output};
use error::{CliError, CliResult};

const EXIT_CHECKS_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;

fn run(cli: &Cli) -> CliResult<Outcome> {
    if !(cli.steps_per_unit >= 1.0 && cli.steps_per_unit.is_finite()) {
        return Err(CliError::Usage(format!(
            "--steps-per-unit must be at least 1, got {}",
            cli.steps_per_unit
        )));
    }
    let opts = IntegratorOptions::with_density(cli.steps_per_unit);
    let out = Output { path: cli.out.clone() };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Usage(e.to_string()))?;
    pool.install(|| match &cli.command {
        Command::Simulate(a) => commands::simulate(a, &opts, &out),
        Command::Efficiency(a) => commands::efficiency(a, &opts, &out),
        Command::Verify(a) => commands::verify(a, &opts, &out),
        Command::Search(a) => commands::search(a, &opts, &out),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::ChecksFailed) => ExitCode::from(EXIT_CHECKS_FAILED),
        Err(CliError::Core(e)) => {
            eprintln!("error: {}: {e}", e.kind());
            ExitCode::from(EXIT_USAGE)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
