use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use mfrate::report::Format;
use mfrate::{execute, Command, RunConfig};

/// Large-deviation experiments for weakly interacting particle systems.
#[derive(Debug, Parser)]
#[command(name = "mfrate", version)]
struct Cli {
    /// TOML run configuration; defaults apply when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Root seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; overrides the config.
    #[arg(long, global = true, env = "MFRATE_OUT_DIR")]
    out: Option<PathBuf>,
    /// Report formats; overrides the config.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match cli.config.as_deref().map_or_else(|| Ok(RunConfig::default()), RunConfig::load) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    let seed = cli.seed.or(config.seed).unwrap_or(0);
    let out = cli.out.or_else(|| config.out.clone()).unwrap_or_else(|| PathBuf::from("mfrate-out"));
    let format = cli.format.or(config.format).unwrap_or_default();
    match execute(cli.command, &config, seed, &out, format) {
        Ok(outcome) => {
            for line in &outcome.summary {
                println!("{line}");
            }
            for file in &outcome.files {
                println!("wrote {}", file.display());
            }
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
