mod args;
mod commands;
mod error;
mod settings;

use std::process::ExitCode;

use clap::Parser;

use args::Cli;
use settings::Settings;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = Settings::resolve(&cli.global).and_then(|s| commands::run(&s, cli.command));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
