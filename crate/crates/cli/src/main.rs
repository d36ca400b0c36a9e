mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::SimulatePoisson(a) => commands::simulate_poisson(a.layered()?),
        Command::SimulateHawkes(a) => commands::simulate_hawkes(a.layered()?),
        Command::Fit(a) => commands::fit(a.layered()?),
        Command::Rates(a) => commands::rates(a.layered()?),
        Command::Compare(a) => commands::compare(a.layered()?),
    }
}

/// 2 when the failure came from a solver or simulator, 1 otherwise.
fn exit_code(err: &anyhow::Error) -> u8 {
    let solver_failure = err
        .chain()
        .filter_map(|e| e.downcast_ref::<shifted_sdca::Error>())
        .any(shifted_sdca::Error::is_solver_failure);
    if solver_failure {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let benign = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = e.print();
            return if benign {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", format!("{err:#}").replace('\n', " "));
            ExitCode::from(exit_code(&err))
        }
    }
}
