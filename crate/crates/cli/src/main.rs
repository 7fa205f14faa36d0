use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use delay_hopf_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let outcome = run(&cli);
    let _ = std::io::stdout().write_all(outcome.stdout.as_bytes());
    if let Some(e) = &outcome.error {
        eprintln!("delay-hopf: {e}");
    }
    ExitCode::from(outcome.exit_code())
}
