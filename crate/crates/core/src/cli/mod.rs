//! Batch experiment runner behind the `ontic` binary.
//!
//! Each run is described by an [`ExperimentConfig`], built from a JSON file
//! (`--config`), command-line flags, or both with flags taking precedence.
//! JSON output has a fixed key order: `tool_version`, `subcommand`,
//! `config_echo`, `seed`, `verdict`, the result fields, then `meta`, which
//! holds timings and is the only part allowed to differ between reruns.
//! CSV output starts with a `# config:` comment line, then a header row.
//!
//! Exit status: 0 for a pass verdict, 1 for a fail verdict or a failed
//! computation, 2 for usage and configuration errors.

mod args;
mod config;
mod run;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

pub use args::Cli;
pub use config::{
    parse_probe_pairs, validate, BellMethod, ConfigError, ConserveMode, ExperimentConfig, OutputFormat, Parameters,
    Subcommand, MAX_CONE_SITES, MAX_ORBIT_STEPS,
};
pub use run::{resolve, run, RunError, RunOutput, TOOL_VERSION};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Merges the optional config file with the parsed flags.
pub fn build_config(cli: &Cli) -> Result<ExperimentConfig, Vec<ConfigError>> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| vec![ConfigError::new("config", format!("cannot read {}: {e}", path.display()))])?;
            let file = ExperimentConfig::from_json(&text).map_err(|e| vec![e])?;
            if let Some(cmd) = &cli.command {
                if cmd.subcommand() != file.subcommand {
                    return Err(vec![ConfigError::new(
                        "subcommand",
                        format!(
                            "config file is for {} but {} was requested",
                            file.subcommand.name(),
                            cmd.subcommand().name()
                        ),
                    )]);
                }
            }
            file
        }
        None => match &cli.command {
            Some(cmd) => ExperimentConfig::new(cmd.subcommand()),
            None => return Err(vec![ConfigError::new("subcommand", "no subcommand and no --config given")]),
        },
    };
    if let Some(cmd) = &cli.command {
        config.parameters.overlay(&cmd.parameters());
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = cli.out {
        config.output_format = out;
    }
    if let Some(path) = &cli.output {
        config.output_path = Some(path.clone());
    }
    Ok(config)
}

/// Runs the binary on `args` and returns its exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    let config = match build_config(&cli) {
        Ok(c) => c,
        Err(errors) => {
            for e in errors {
                eprintln!("error: {e}");
            }
            return EXIT_USAGE;
        }
    };
    let output = match run(&config) {
        Ok(o) => o,
        Err(RunError::Usage(errors)) => {
            for e in errors {
                eprintln!("error: {e}");
            }
            return EXIT_USAGE;
        }
        Err(e @ RunError::Failed(_)) => {
            eprintln!("error: {e}");
            return EXIT_FAIL;
        }
    };
    let written = match &config.output_path {
        Some(path) => std::fs::write(path, &output.text),
        None => std::io::stdout().write_all(output.text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write output: {e}");
        return EXIT_FAIL;
    }
    output.exit_code()
}
