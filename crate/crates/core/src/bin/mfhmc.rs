use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use mfhmc::cli_io::{execute, parse_config, Cli};

fn main() -> ExitCode {
    // let clap handle --help and --version itself
    if let Err(e) = Cli::try_parse() {
        if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
            e.exit();
        }
    }
    match parse_config(std::env::args_os(), None).and_then(|c| execute(&c)) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
