//! Experiment runner CLI.
//!
//! ```text
//! fronthaul run <spec.toml> [--out DIR] [--seed S] [--trials N] [--no-mc]
//! fronthaul recipe <name>   [--out DIR] [--seed S] [--trials N] [--no-mc] [--workers W]
//! fronthaul optimize <spec.toml> --sigma <deg> [--out DIR]
//! ```
//!
//! The default output directory is `$FRONTHAUL_OUT`, falling back to `./out`.

use clap::{Parser, Subcommand};
use fronthaul::experiment::{
    optimize_config, run_experiment, run_recipe, write_optimize_outputs, ExperimentSpec, Recipe,
};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "fronthaul", version, about = "UAV mmWave fronthaul SINR simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every grid point of a TOML experiment spec.
    Run {
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Replace the spec's seed list with a single seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the Monte Carlo trial count.
        #[arg(long)]
        trials: Option<usize>,
        /// Analytic columns only.
        #[arg(long)]
        no_mc: bool,
    },
    /// Run a named figure/table recipe (fig6, fig7, fig8a, fig8b, fig9,
    /// table4, table5).
    Recipe {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        no_mc: bool,
        /// Worker threads (default: all cores). Results are byte-identical
        /// for any worker count.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Grid-search the capacity-maximizing (N', R_u) under the outage target.
    Optimize {
        spec: PathBuf,
        #[arg(long)]
        sigma: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> fronthaul::Result<ExitCode> {
    match cli.command {
        Command::Run { spec, out, seed, trials, no_mc } => {
            let mut spec = ExperimentSpec::load(&spec)?;
            if let Some(s) = seed {
                spec.seeds = vec![s];
            }
            if let Some(t) = trials {
                spec.mc.trials = t;
            }
            if no_mc {
                spec.mc.enabled = false;
            }
            let report = run_experiment(&spec, out.as_deref(), "run")?;
            report_summary(&report);
            Ok(if report.failures == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Recipe { name, out, seed, trials, no_mc, workers } => {
            let recipe = Recipe::parse(&name)?;
            let go = || run_recipe(recipe, seed, trials, no_mc, out.as_deref());
            let report = match workers {
                Some(w) => rayon::ThreadPoolBuilder::new()
                    .num_threads(w)
                    .build()
                    .map_err(|e| fronthaul::Error::Config(format!("thread pool: {e}")))?
                    .install(go),
                None => go(),
            }?;
            report_summary(&report);
            Ok(if report.failures == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Optimize { spec, sigma, out } => {
            let spec = ExperimentSpec::load(&spec)?;
            let outcome = optimize_config(&spec, sigma)?;
            let out_dir = out.unwrap_or_else(|| {
                std::env::var(fronthaul::experiment::OUT_DIR_ENV)
                    .map(PathBuf::from)
                    .unwrap_or_else(|_| PathBuf::from("out"))
            });
            write_optimize_outputs(&outcome, &out_dir, "optimize")?;
            match outcome.median_optimum() {
                Some(o) => println!(
                    "sigma {:.2} deg: median optimum N' = {}, R_u = {}, capacity = {:.3} bit/s/Hz",
                    sigma, o.n_rx, o.reuse, o.capacity_bps_hz
                ),
                None => println!("sigma {sigma:.2} deg: no feasible configuration"),
            }
            for (seed, opt) in &outcome.per_seed {
                match opt {
                    Some(o) => println!(
                        "  seed {seed}: N' = {}, R_u = {}, capacity = {:.3}, outage = {:.3e}",
                        o.n_rx, o.reuse, o.capacity_bps_hz, o.outage
                    ),
                    None => println!("  seed {seed}: infeasible"),
                }
            }
            println!("wrote {}", out_dir.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn report_summary(report: &fronthaul::experiment::RunReport) {
    println!(
        "{} rows ({} failures) -> {}",
        report.rows.len(),
        report.failures,
        report.out_dir.display()
    );
    for r in report.rows.iter().take(12) {
        println!(
            "  seed {} sigma {:.1} N' {:2} Ru {:2}: outage {:.3e}, capacity {:.3} bit/s/Hz{}",
            r.seed,
            r.sigma_theta_deg,
            r.n_rx,
            r.reuse,
            r.outage_analytic,
            r.capacity_analytic_bps_hz,
            r.sup_cdf_distance
                .map(|d| format!(", sup-CDF {d:.4}"))
                .unwrap_or_default()
        );
    }
    if report.rows.len() > 12 {
        println!("  ... {} more rows in CSV", report.rows.len() - 12);
    }
}
