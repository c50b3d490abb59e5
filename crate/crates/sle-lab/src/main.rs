use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sle_lab::config::{parse_config, ExperimentConfig, ExperimentKind};
use sle_lab::experiments;

#[derive(Parser)]
#[command(name = "sle-lab", about = "Backward Loewner / Bessel experiment runner", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Config file (directory of configs for `all`)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the base seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores); results are identical either way
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Override the step size (t_end / dt rounded to an integer step count)
    #[arg(long, global = true)]
    dt: Option<f64>,
    /// Override the kappa list, comma separated
    #[arg(long, global = true, value_delimiter = ',')]
    kappa: Option<Vec<f64>>,
}

#[derive(Subcommand)]
enum Command {
    /// Real-hit / double-point fractions across the kappa phases
    PhaseScan,
    /// Absorbing vs reflecting classification of the Bessel boundary
    Boundary,
    /// Reflecting solution and its mirror: two solutions from one driver
    Mirror,
    /// Restart the flow at macroscopic excursions; measure hull bases
    ExcursionHull,
    /// P(all excursions short) across horizons, with the iteration inequality
    Lambda,
    /// Two-sample KS test of the backward-flow / inverse-map identity
    DistTest,
    /// Render traces (SVG + CSV) with hull base and bubbles
    TraceSvg,
    /// Run every config in a directory
    All,
}

fn expected_kind(cmd: &Command) -> Option<ExperimentKind> {
    match cmd {
        Command::PhaseScan => Some(ExperimentKind::PhaseScan),
        Command::Boundary => Some(ExperimentKind::BoundaryClass),
        Command::Mirror => Some(ExperimentKind::Mirror),
        Command::ExcursionHull => Some(ExperimentKind::ExcursionHull),
        Command::Lambda => Some(ExperimentKind::Lambda),
        Command::DistTest => Some(ExperimentKind::DistributionTest),
        Command::TraceSvg => Some(ExperimentKind::TraceRender),
        Command::All => None,
    }
}

fn apply_overrides(cfg: &mut ExperimentConfig, cli: &Cli) {
    if let Some(seed) = cli.seed {
        cfg.base_seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    if let Some(dt) = cli.dt {
        cfg.n_steps = (cfg.t_end / dt).round().max(1.0) as usize;
    }
    if let Some(kappa) = &cli.kappa {
        cfg.kappa = kappa.clone();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(w) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w).build_global() {
            eprintln!("config error: --workers {w}: {e}");
            return ExitCode::from(2);
        }
    }
    let config_path = match &cli.config {
        Some(p) => p.clone(),
        None => {
            eprintln!("config error: --config is required");
            return ExitCode::from(2);
        }
    };

    if matches!(cli.command, Command::All) {
        return match experiments::run_all(&config_path) {
            Ok(reports) => {
                let pass = reports.iter().all(|r| r.pass);
                for r in &reports {
                    println!("{}: {}", r.experiment, if r.pass { "pass" } else { "FAIL" });
                }
                if pass {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(1)
                }
            }
            Err(e) => {
                eprintln!("config error: {e:#}");
                ExitCode::from(2)
            }
        };
    }

    let mut cfg = match parse_config(&config_path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    apply_overrides(&mut cfg, &cli);
    if let Err(e) = cfg.validate() {
        eprintln!("config error:\n{e}");
        return ExitCode::from(2);
    }
    if let Some(kind) = expected_kind(&cli.command) {
        if cfg.experiment != kind {
            eprintln!(
                "config error: config declares experiment `{}` but the subcommand expects `{kind}`",
                cfg.experiment
            );
            return ExitCode::from(2);
        }
    }
    match experiments::dispatch(&cfg) {
        Ok(report) => {
            for row in &report.rows {
                let kappa = row.kappa.map_or(String::new(), |k| format!("kappa={k} "));
                let gate = match row.pass {
                    Some(true) => "pass",
                    Some(false) => "FAIL",
                    None => "info",
                };
                println!("{kappa}{}: {:.6} (n={}) [{gate}]", row.label, row.value, row.n);
            }
            println!(
                "{}: {} in {:.1}s",
                report.experiment,
                if report.pass { "pass" } else { "FAIL" },
                report.wall_clock_secs
            );
            if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("config error: {e:#}");
            ExitCode::from(2)
        }
    }
}
