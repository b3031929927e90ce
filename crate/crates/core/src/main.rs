use std::process::ExitCode;

use clap::Parser;

use qccp::cli::{self, Cli};

fn main() -> ExitCode {
    match cli::run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("qccp: one or more checks failed");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("qccp: {e}");
            ExitCode::from(2)
        }
    }
}
