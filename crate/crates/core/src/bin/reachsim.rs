use std::process::ExitCode;

use clap::Parser;
use reachsim::cli::{execute, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli, &mut std::io::stdout()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("reachsim: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
