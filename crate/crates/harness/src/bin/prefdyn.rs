use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use prefdyn_harness::check::run_checks;
use prefdyn_harness::design_cmd::{load_catalog, parse_target, run_design};
use prefdyn_harness::{run_to_dir, ExperimentConfig, HarnessError, Result};

#[derive(Parser)]
#[command(name = "prefdyn", version, about = "Preference-dynamics experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Directory receiving results.csv and summary.json.
        #[arg(long)]
        out: PathBuf,
    },
    /// Design randomization weights for a target direction.
    Design {
        /// JSON array of item vectors, or a "random:N:seed" string.
        #[arg(long)]
        catalog: PathBuf,
        /// Comma-separated coordinates or a catalog index.
        #[arg(long, allow_hyphen_values = true)]
        target: String,
        #[arg(long)]
        out: PathBuf,
        /// Restrict to a greedy self-aligned subset with q^T v >= threshold.
        #[arg(long)]
        threshold: Option<f64>,
        /// Needed for random catalogs.
        #[arg(long)]
        dimension: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the quick invariant suite.
    Check {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn read(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, out } => {
            let cfg = ExperimentConfig::from_json(&read(&config)?)?;
            let result = run_to_dir(&cfg, &out)?;
            eprintln!("wrote {} rows to {}", result.table.rows.len(), out.display());
        }
        Command::Design {
            catalog,
            target,
            out,
            threshold,
            dimension,
            seed,
        } => {
            let cat = load_catalog(&read(&catalog)?, dimension)?;
            let v = parse_target(&target, &cat)?;
            let summary = run_design(&cat, &v, threshold, seed)?;
            let mut text = serde_json::to_string_pretty(&summary).map_err(|e| HarnessError::InvariantBreach(e.to_string()))?;
            text.push('\n');
            std::fs::write(&out, text)?;
        }
        Command::Check { seed } => {
            let results = run_checks(seed);
            for r in &results {
                println!("[{}] {} ({})", if r.passed { "pass" } else { "FAIL" }, r.name, r.detail);
            }
            if let Some(r) = results.iter().find(|r| !r.passed) {
                return Err(HarnessError::InvariantBreach(r.name.to_string()));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("prefdyn: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
