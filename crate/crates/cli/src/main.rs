mod args;
mod commands;
mod plot;

use std::process::ExitCode;

use anyhow::Result;
use clap::Parser;

use args::{Cli, Command, DemoConfig, ReconstructConfig, RunConfig};

/// 2 for I/O and malformed input, 3 for violated numerical preconditions.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<nspyr::Error>() {
            return match e {
                nspyr::Error::Parse { .. } => 2,
                _ => 3,
            };
        }
        if cause.is::<std::io::Error>() || cause.is::<serde_json::Error>() {
            return 2;
        }
    }
    1
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Decompose(a) => commands::decompose(&RunConfig::resolve(&a)?),
        Command::Reconstruct(a) => commands::reconstruct(&ReconstructConfig::resolve(&a)?),
        Command::Gamma(a) => commands::gamma(&RunConfig::resolve(&a)?),
        Command::CircleDemo(a) => commands::circle_demo(&DemoConfig::resolve(&a, false)?),
        Command::AnomalyDemo(a) => commands::anomaly_demo(&DemoConfig::resolve(&a, true)?),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("NSPYR_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
