use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use starnls::{estimate_gn_constant, threshold_table, EdgeGrid, Focusing, GnConfig, ModelParams};
use starnls_cli::{check, run_scenario, sweep, Scenario};

#[derive(Parser)]
#[command(name = "starnls", version, about = "Nonlinear Schrödinger experiments on star graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its artifacts.
    Run {
        config: PathBuf,
        /// Override the scenario's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the scenario over its [sweep] grid (worker budget from STARNLS_WORKERS).
    Sweep {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the threshold table as JSON.
    Thresholds {
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 1.0)]
        omega: f64,
        #[arg(long, default_value_t = 0.0)]
        gamma: f64,
        #[arg(long, default_value_t = 3)]
        n_edges: usize,
    },
    /// Estimate the star-graph Gagliardo–Nirenberg constant.
    GnEstimate {
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 0.0)]
        gamma: f64,
        /// Ascent iterations per restart.
        #[arg(long, default_value_t = 200)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        #[arg(long, default_value_t = 60.0)]
        length: f64,
        #[arg(long, default_value_t = 0.02)]
        h: f64,
        #[arg(long, default_value_t = 3)]
        n_edges: usize,
    },
    /// Run the built-in property suite.
    Check {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn load(config: &Path, out: Option<PathBuf>) -> Result<Scenario> {
    let mut s = Scenario::load(config)?;
    if let Some(dir) = out {
        s.outputs.directory = dir;
    }
    Ok(s)
}

fn execute(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run { config, out } => {
            let s = load(&config, out)?;
            let r = run_scenario(&s)?;
            for f in &r.files {
                println!("{}", f.display());
            }
            Ok(true)
        }
        Command::Sweep { config, out } => {
            let s = load(&config, out)?;
            let workers = sweep::worker_budget()?;
            let rows = sweep::sweep(&s, workers)?;
            let failed = rows.iter().filter(|r| r.error.is_some()).count();
            for f in sweep::write_sweep(&rows, &s.outputs.directory, s.outputs.json)? {
                println!("{}", f.display());
            }
            if failed > 0 {
                eprintln!("{failed} of {} cells failed; see the status column", rows.len());
            }
            Ok(true)
        }
        Command::Thresholds { p, omega, gamma, n_edges } => {
            let mp = ModelParams {
                n_edges,
                gamma,
                p,
                sign: Focusing::Focusing,
                omega,
            };
            println!("{}", serde_json::to_string_pretty(&threshold_table(&mp)?)?);
            Ok(true)
        }
        Command::GnEstimate {
            p,
            gamma,
            budget,
            seed,
            restarts,
            length,
            h,
            n_edges,
        } => {
            let mp = ModelParams {
                n_edges,
                gamma,
                p,
                sign: Focusing::Focusing,
                omega: 1.0,
            };
            let cfg = GnConfig {
                budget,
                restarts,
                seed,
                ..GnConfig::default()
            };
            let e = estimate_gn_constant(&mp, EdgeGrid::with_spacing(length, h)?, &cfg)?;
            let summary = serde_json::json!({
                "p": p,
                "gamma": gamma,
                "seed": seed,
                "value": e.value,
                "target": e.target,
                "relative_gap": e.relative_gap(),
                "max_trial_ratio": e.max_trial_ratio,
                "ascent_best": e.ascent_best,
                "restart_best": e.restart_best,
                "escape_series": e.escape_series,
                "escape_is_monotone": e.escape_is_monotone(),
                "witness_centroid": e.witness_centroid,
            });
            println!("{}", serde_json::to_string_pretty(&summary)?);
            Ok(true)
        }
        Command::Check { seed } => {
            let results = check::run_checks(seed)?;
            let mut ok = true;
            for r in &results {
                ok &= r.pass;
                println!(
                    "[{}] {}: {:.3e} (tol {:.1e})",
                    if r.pass { "PASS" } else { "FAIL" },
                    r.name,
                    r.value,
                    r.tolerance
                );
            }
            Ok(ok)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
