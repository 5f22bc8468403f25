use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use nnip_landscape::experiment::{execute, Command, ErrorInfo, RunOptions, OUTPUT_DIR_ENV};

/// Loss landscapes, loss entropy and MD stability experiments.
#[derive(Parser)]
#[command(version, after_help = format!(
    "Settings are layered: defaults < --config file < --set < --seed/--out.\n\
     Without an output directory anywhere, ${OUTPUT_DIR_ENV} is used, then ./runs."
))]
struct Cli {
    command: Command,
    /// TOML experiment config.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set train.max_epochs=50`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for the parallel parts (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let msg = serde_json::json!({"error": {"kind": "config", "message": e.to_string().trim(), "exit_code": 2}});
            eprintln!("{msg}");
            return ExitCode::from(2);
        }
    };
    let outcome = execute(
        cli.command,
        &RunOptions {
            config: cli.config,
            set: cli.set,
            seed: cli.seed,
            out: cli.out,
            threads: cli.threads,
        },
    );
    match &outcome.error {
        None => {
            println!("{}", outcome.manifest_path.display());
            ExitCode::SUCCESS
        }
        Some(e) => {
            let info = ErrorInfo::from(e);
            eprintln!(
                "{}",
                serde_json::json!({ "error": info, "manifest": outcome.manifest_path })
            );
            ExitCode::from(outcome.exit_code() as u8)
        }
    }
}
