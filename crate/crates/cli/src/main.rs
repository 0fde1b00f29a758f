use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use ncpqec_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            print!("{}", outcome.stdout);
            let _ = std::io::stdout().flush();
            match outcome.failure {
                Some(e) => {
                    eprintln!("ncpqec: {e}");
                    ExitCode::from(e.exit_code() as u8)
                }
                None => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            eprintln!("ncpqec: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
