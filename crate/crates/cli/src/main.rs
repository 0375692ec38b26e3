use std::process::ExitCode;

use clap::Parser;
use qhm::commands::{emit, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli).and_then(|text| emit(&cli, &text)) {
        Ok(Some(text)) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(2)
        }
    }
}
