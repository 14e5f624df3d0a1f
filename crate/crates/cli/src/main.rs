use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = aptring_cli::Cli::parse();
    match aptring_cli::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
