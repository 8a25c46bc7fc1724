use std::process::ExitCode;

use clap::Parser;
use graftci_cli::app::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(cli, &mut std::io::stdout().lock(), &mut std::io::stderr().lock());
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
