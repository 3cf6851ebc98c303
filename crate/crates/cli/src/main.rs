use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ggescatter_cli::config::RunConfig;
use ggescatter_cli::experiments;

#[derive(Parser)]
#[command(name = "ggescatter", version, about = "GGE scattering dynamics for dissipative Ising chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        /// Path to the TOML run configuration.
        config: PathBuf,
        /// Output directory override.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse and validate a config file without running it.
    Validate {
        /// Path to the TOML run configuration.
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out } => RunConfig::from_path(&config).and_then(|cfg| {
            let dir = out
                .or_else(|| cfg.output.dir.as_ref().map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("out"));
            experiments::run(&cfg, &dir)?;
            println!("wrote results to {}", dir.display());
            Ok(())
        }),
        Command::Validate { config } => RunConfig::from_path(&config).map(|cfg| {
            println!("valid config for experiment = {}", cfg.run.experiment.name());
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
