use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use coop_ht_cli::{exit_code, run, Command};

/// Error exponents and coding simulations for distributed testing against
/// independence over a cooperative MAC.
#[derive(Parser)]
#[command(name = "coop-ht", version)]
struct Args {
    command: Command,
    /// JSON run configuration.
    config: PathBuf,
    /// `--dotted.key value` pairs overriding config entries.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
    overrides: Vec<String>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args.command, &args.config, &args.overrides) {
        Ok(Some(text)) => {
            let mut out = std::io::stdout().lock();
            if out.write_all(text.as_bytes()).and_then(|_| out.flush()).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("coop-ht: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
