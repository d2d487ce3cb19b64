//! Library half of the batch CLI; `main` is a thin exit-code wrapper.

pub mod args;
pub mod config;
pub mod run;

use clap::Parser;

use config::RunConfig;
use run::RunError;

/// Parse a configuration from argv-style tokens or from `--config FILE`.
pub fn parse_config<I, T>(argv: I) -> Result<RunConfig, String>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = args::Cli::try_parse_from(argv).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
            // not config errors; surface the full text
            e.to_string()
        }
        _ => e
            .to_string()
            .lines()
            .next()
            .unwrap_or("invalid arguments")
            .to_string(),
    })?;
    let config = match (cli.config, cli.command) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            toml::from_str::<RunConfig>(&text).map_err(|e| format!("bad config file: {e}"))?
        }
        (None, Some(command)) => args::to_run_config(command)?,
        (Some(_), Some(_)) => return Err("give either --config or a subcommand, not both".into()),
        (None, None) => return Err("missing subcommand (try --help)".into()),
    };
    config.validate()?;
    Ok(config)
}

/// Full command-line entry; returns the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let config = match parse_config(argv) {
        Ok(c) => c,
        Err(msg) => {
            // help/version requests come through here with exit code 0
            if msg.starts_with("hsystem") || msg.contains("Usage:") {
                println!("{msg}");
                return 0;
            }
            eprintln!("config error: {msg}");
            return 1;
        }
    };
    match run::run(&config) {
        Ok(report) => match run::emit(&config, &report) {
            Ok(()) => 0,
            Err(e) => {
                eprintln!("{}", e.message());
                e.exit_code()
            }
        },
        Err(e) => {
            eprintln!(
                "{} error: {}",
                match e {
                    RunError::Config(_) => "config",
                    RunError::Numerical(_) => "numerical",
                },
                e.message()
            );
            e.exit_code()
        }
    }
}
