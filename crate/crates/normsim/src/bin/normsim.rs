use std::process::ExitCode;

use clap::Parser;
use normsim::cli::{self, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli::run(cli, &mut std::io::stdout().lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("normsim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
