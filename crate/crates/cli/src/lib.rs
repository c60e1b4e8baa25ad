//! Command-line front end: loads a run configuration, dispatches to the
//! exponent solver or the simulator, and writes CSV or JSON.

pub mod commands;
pub mod config;

use std::path::Path;

use coop_ht::error::Error;

pub use config::{Command, Format, LoadedConfig, RunConfig};

/// Exit status for a failed run: 3 for guard violations, 2 for everything
/// attributable to the configuration.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Guard(_) => 3,
        _ => 2,
    }
}

/// Runs `command` on an already loaded configuration and returns the
/// rendered output.
pub fn execute(command: Command, loaded: &LoadedConfig) -> Result<String, Error> {
    let cfg = &loaded.config;
    if let Some(c) = cfg.command {
        if c != command {
            return Err(Error::Usage(format!(
                "config is for '{}' but '{}' was requested",
                c.name(),
                command.name()
            )));
        }
    }
    let s = loaded.source()?;
    let default = if command == Command::Sweep { Format::Csv } else { Format::Json };
    let format = cfg.format.unwrap_or(default);
    match command {
        Command::Exponent => commands::render_exponent(&commands::exponent(cfg, &s)?, format),
        Command::Sweep => commands::render_sweep(&commands::sweep(cfg, &s)?, format),
        Command::Oracle => commands::render_oracle(&commands::oracle(cfg, &s)?, format),
        Command::Simulate => commands::render_simulate(&commands::simulate(cfg, &s)?, format),
    }
}

/// Loads the config, applies the overrides, runs the command and writes
/// the result to the configured output (or returns it for standard output).
pub fn run(command: Command, config_path: &Path, overrides: &[String]) -> Result<Option<String>, Error> {
    let overrides = config::parse_overrides(overrides)?;
    let loaded = config::load_config(config_path, &overrides)?;
    let text = execute(command, &loaded)?;
    match &loaded.config.output {
        Some(path) => {
            std::fs::write(path, text)?;
            Ok(None)
        }
        None => Ok(Some(text)),
    }
}
