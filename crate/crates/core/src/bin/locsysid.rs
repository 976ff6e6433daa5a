use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use locsysid::harness::{cmd_identify, cmd_repro_paper, cmd_simulate, cmd_sweep, ExperimentConfig};

#[derive(Parser)]
#[command(name = "locsysid", version, about = "Local identification of subsystems in LTI networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Experiment config (JSON); built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Run a single seed instead of the configured list.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate trajectories and write CSV plus metadata.
    Simulate(Common),
    /// Identify the configured node and write JSON reports.
    Identify(Common),
    /// Solve over the delta x delta_h grid and write sweep.csv.
    Sweep(Common),
    /// Run both chain experiments and check the acceptance bands.
    ReproPaper(Common),
}

fn load(c: &Common) -> locsysid::Result<ExperimentConfig> {
    match &c.config {
        Some(p) => ExperimentConfig::load(p),
        None => Ok(ExperimentConfig::default()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (Command::Simulate(c) | Command::Identify(c) | Command::Sweep(c) | Command::ReproPaper(c)) = &cli.command;
    let cfg = match load(c) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let out = c.out.as_deref();
    let result = match &cli.command {
        Command::Simulate(_) => cmd_simulate(&cfg, c.seed, out).map(|metas| {
            for m in metas {
                println!("seed {}: {}", m.seed, m.csv);
            }
            true
        }),
        Command::Identify(_) => cmd_identify(&cfg, c.seed, out).map(|s| {
            for p in &s.reports {
                println!("report {}", p.display());
            }
            for f in &s.failures {
                eprintln!("failure: {f}");
            }
            s.passed()
        }),
        Command::Sweep(_) => cmd_sweep(&cfg, c.seed, out).map(|rows| {
            for r in &rows {
                println!(
                    "delta {:<8} delta_h {:<8} sigma {:.4?} error {} {}",
                    r.delta,
                    r.delta_h.map_or("-".into(), |d| d.to_string()),
                    &r.sigma[..4],
                    r.error.map_or("-".into(), |e| format!("{e:.4}")),
                    r.status
                );
            }
            rows.iter().all(|r| !r.status.starts_with("error"))
        }),
        Command::ReproPaper(_) => cmd_repro_paper(&cfg, c.seed, out).map(|s| {
            for check in &s.checks {
                let op = if check.upper { "<=" } else { ">=" };
                let verdict = if check.passed { "PASS" } else { "FAIL" };
                println!("{verdict} {}: {:.4} {op} {}", check.name, check.value, check.bound);
            }
            s.passed()
        }),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
