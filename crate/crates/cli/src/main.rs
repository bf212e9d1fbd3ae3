use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use dipolekit_cli::config::Cli;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let line = text.lines().next().unwrap_or("invalid arguments");
            eprintln!("dipolekit: {}", line.trim_start_matches("error: "));
            return ExitCode::from(dipolekit_cli::EXIT_CONFIG);
        }
    };
    match dipolekit_cli::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("dipolekit: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
