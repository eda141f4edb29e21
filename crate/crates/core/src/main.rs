use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cavity_budget::config::{GridConfig, ScenarioConfig, CONFIG_DIR_ENV};
use cavity_budget::scenario::{run_budget, run_isolation, run_quantum_design, run_suspension_tf};
use cavity_budget::Result;

#[derive(Parser)]
#[command(
    name = "cavity-budget",
    version,
    about = "Noise budget and control simulator for a suspended Fabry-Perot cavity pair"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Config file, or the name of a scenario in the config directory or built in.
    #[arg(long, default_value = "paper_default")]
    config: String,
    /// Output directory (default: the config's `output_dir`, else `out/<scenario>`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Frequency grid override as `fmin,fmax,n`.
    #[arg(long)]
    grid: Option<String>,
    /// Directory searched for `<name>.json`.
    #[arg(long, env = CONFIG_DIR_ENV)]
    config_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Full displacement noise budget.
    Budget(Common),
    /// Suspension transfer functions and modes.
    SuspensionTf(Common),
    /// Active isolation platform loop.
    Isolation(Common),
    /// Quantum noise design curves.
    Quantum(Common),
}

fn load(c: &Common) -> Result<(ScenarioConfig, PathBuf)> {
    let mut cfg = ScenarioConfig::locate(&c.config, c.config_dir.as_deref())?;
    if let Some(g) = &c.grid {
        cfg.grid = GridConfig::parse(g)?;
    }
    let out = c
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(&cfg.name));
    Ok((cfg, out))
}

fn report(files: Vec<PathBuf>, warnings: &[String], summary: &impl serde::Serialize) -> Result<()> {
    for w in warnings {
        eprintln!("warning: {w}");
    }
    println!("{}", serde_json::to_string_pretty(summary)?);
    for f in files {
        eprintln!("wrote {}", f.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Budget(c) => {
            let (cfg, out) = load(c)?;
            let r = run_budget(&cfg)?;
            report(r.write(&out)?, &r.warnings, &r.summary)
        }
        Command::SuspensionTf(c) => {
            let (cfg, out) = load(c)?;
            let r = run_suspension_tf(&cfg)?;
            report(r.write(&out)?, &r.warnings, &r.summary)
        }
        Command::Isolation(c) => {
            let (cfg, out) = load(c)?;
            let r = run_isolation(&cfg)?;
            report(r.write(&out)?, &r.warnings, &r.summary)
        }
        Command::Quantum(c) => {
            let (cfg, out) = load(c)?;
            let r = run_quantum_design(&cfg)?;
            report(r.write(&out)?, &r.warnings, &r.summary)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { 1 } else { 2 })
        }
    }
}
