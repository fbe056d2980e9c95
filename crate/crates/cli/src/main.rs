use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{CommandFactory, Parser};
use edgehealth_cli::{run, Cli, UsageError};

fn main() -> ExitCode {
    // Malformed command lines exit with status 2 from inside `parse`.
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => match err.downcast_ref::<UsageError>() {
            Some(usage) => Cli::command()
                .error(ErrorKind::MissingRequiredArgument, usage)
                .exit(),
            None => {
                eprintln!("error: {err:#}");
                ExitCode::from(1)
            }
        },
    }
}
