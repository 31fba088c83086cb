use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qdistill_cli::{exit, peak, sweep, validate, CliError, Experiment};

/// Survival probability and purity of a particle distilled by repeated
/// measurements of a cavity.
#[derive(Parser)]
#[command(name = "qdistill", version)]
struct Cli {
    /// Print the effective configuration as TOML and exit.
    #[arg(long, global = true)]
    dump_config: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact, asymptotic and closed-form P(N) and Pi(N) as CSV.
    Sweep {
        config: PathBuf,
        /// Write the CSV here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Location, decay rate and curvature of the filtered peak.
    Peak {
        config: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Check the invariants of the configured model.
    Validate {
        config: PathBuf,
        /// Also check at every N listed in the configuration.
        #[arg(long)]
        strict: bool,
    },
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let path = match &cli.command {
        Command::Sweep { config, .. } | Command::Peak { config, .. } | Command::Validate { config, .. } => config,
    };
    let exp = Experiment::load(path)?;
    if cli.dump_config {
        print!("{}", exp.config.to_toml());
        return Ok(exit::SUCCESS);
    }
    match cli.command {
        Command::Sweep { out, .. } => {
            let csv = sweep(&exp)?;
            match out {
                Some(p) => std::fs::write(&p, csv)
                    .map_err(|e| CliError::Config(format!("cannot write {}: {e}", p.display())))?,
                None => print!("{csv}"),
            }
            Ok(exit::SUCCESS)
        }
        Command::Peak { json, .. } => {
            let report = peak(&exp)?;
            print!("{}", if json { report.to_json() } else { report.to_text() });
            Ok(exit::SUCCESS)
        }
        Command::Validate { strict, .. } => {
            let report = validate(&exp, strict)?;
            print!("{}", report.to_text());
            Ok(if report.passed() { exit::SUCCESS } else { exit::VALIDATION_FAILED })
        }
    }
}

fn main() -> ExitCode {
    let code = match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("qdistill: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
