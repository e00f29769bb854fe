use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = chemotaxis_cli::Cli::parse();
    match chemotaxis_cli::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
