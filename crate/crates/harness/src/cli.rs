//! Command-line interface. Exit status: 0 success, 1 numerical abort, 2 bad input.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use kdv_core::diagnostics::convergence_order;

use crate::config::ConfigFile;
use crate::error::HarnessError;
use crate::experiment::{Experiment, ExperimentReport};
use crate::presets::{run_all, run_preset, Derived, PRESETS};
use crate::report::write_outcome;

#[derive(Debug, Parser)]
#[command(name = "kdv-bench", about = "Finite-difference experiments for the KdV equation", version)]
struct Cli {
    /// Directory for CSV output (default: results/<name>).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Record diagnostics every K steps.
    #[arg(long, global = true, value_name = "K")]
    report_every: Option<usize>,

    /// Not supported: every run is deterministic.
    #[arg(long, global = true, hide = true)]
    seed: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one experiment file.
    Run { config: PathBuf },
    /// Run a named benchmark experiment.
    Preset { name: String },
    /// List the named experiments.
    List,
    /// Run an experiment file over a grid of parameter values.
    Sweep {
        config: PathBuf,
        /// `KEY=V1,V2,...`; repeat for a Cartesian product. Keys: n, dt, t_final, alpha.
        #[arg(long = "param", required = true)]
        params: Vec<String>,
    },
}

/// Parses `args` (including the program name), runs, and returns the exit status.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<i32, HarnessError> {
    if cli.seed.is_some() {
        return Err(HarnessError::config("--seed is not accepted: runs are deterministic"));
    }
    if cli.report_every == Some(0) {
        return Err(HarnessError::config("--report-every must be positive"));
    }
    let out_dir = |name: &str| cli.out.clone().unwrap_or_else(|| Path::new("results").join(name));
    match &cli.command {
        Command::List => {
            for p in &PRESETS {
                println!("{:<28} {}", p.name, p.description);
            }
            Ok(0)
        }
        Command::Preset { name } => {
            let info = PRESETS
                .iter()
                .find(|p| p.name == name.as_str())
                .ok_or_else(|| HarnessError::config(format!("unknown preset '{name}'; see `kdv-bench list`")))?;
            let outcome = run_preset(name, cli.report_every)?;
            finish(&outcome.reports, &outcome.derived, &out_dir(name), info.expects_aborts)
        }
        Command::Run { config } => {
            let file = ConfigFile::load(config)?;
            let mut exp = file.experiment()?;
            override_reporting(&mut exp, cli.report_every);
            let report = crate::experiment::run(&exp)?;
            finish(std::slice::from_ref(&report), &[], &out_dir(file.name()), false)
        }
        Command::Sweep { config, params } => {
            let file = ConfigFile::load(config)?;
            let grid = parse_params(params)?;
            let mut runs = Vec::new();
            for assignment in cartesian(&grid) {
                let mut variant = file.clone();
                let mut name = file.name().to_string();
                for (key, value) in &assignment {
                    variant = variant.with_param(key, value)?;
                    name.push_str(&format!("_{}{}", key.to_ascii_lowercase(), value));
                }
                let mut exp = variant.experiment()?;
                exp.name = name;
                override_reporting(&mut exp, cli.report_every);
                runs.push(exp);
            }
            let reports = run_all(&runs)?;
            let derived = sweep_order(&grid, &reports);
            finish(&reports, &derived, &out_dir(file.name()), false)
        }
    }
}

fn override_reporting(exp: &mut Experiment, report_every: Option<usize>) {
    if let Some(k) = report_every {
        exp.report_every = k;
    }
}

type Grid = Vec<(String, Vec<String>)>;

fn parse_params(params: &[String]) -> Result<Grid, HarnessError> {
    params
        .iter()
        .map(|p| {
            let (key, values) = p
                .split_once('=')
                .ok_or_else(|| HarnessError::config(format!("--param '{p}' should look like KEY=V1,V2")))?;
            let values: Vec<String> = values.split(',').map(|v| v.trim().to_string()).filter(|v| !v.is_empty()).collect();
            if values.is_empty() {
                return Err(HarnessError::config(format!("--param '{p}' has no values")));
            }
            Ok((key.trim().to_string(), values))
        })
        .collect()
}

fn cartesian(grid: &Grid) -> Vec<Vec<(String, String)>> {
    grid.iter().fold(vec![Vec::new()], |acc, (key, values)| {
        acc.iter()
            .flat_map(|prefix| {
                values.iter().map(move |v| {
                    let mut next = prefix.clone();
                    next.push((key.clone(), v.clone()));
                    next
                })
            })
            .collect()
    })
}

/// A sweep over `n` alone also reports the fitted l-infinity order.
fn sweep_order(grid: &Grid, reports: &[ExperimentReport]) -> Vec<Derived> {
    if grid.len() != 1 || !grid[0].0.eq_ignore_ascii_case("n") {
        return Vec::new();
    }
    let points: Vec<(f64, f64)> = reports.iter().filter(|r| r.completed()).map(|r| (r.n as f64, r.linf)).collect();
    match convergence_order(&points) {
        Ok(order) => vec![Derived { label: "sweep".into(), quantity: "order", value: order }],
        Err(_) => Vec::new(),
    }
}

fn finish(reports: &[ExperimentReport], derived: &[Derived], dir: &Path, expects_aborts: bool) -> Result<i32, HarnessError> {
    write_outcome(reports, derived, dir)?;
    for r in reports {
        match &r.abort {
            None => println!(
                "{:<40} rmse {:<12.4e} linf {:<12.4e} dM {:<10.3e} solitons {}",
                r.name, r.rmse, r.linf, r.momentum_drift, r.solitons
            ),
            Some(a) => println!("{:<40} aborted at step {}: {}", r.name, a.step, a.message),
        }
    }
    for d in derived {
        println!("{:<40} {} {:.4}", d.label, d.quantity, d.value);
    }
    println!("wrote {}", dir.display());
    let aborted = reports.iter().any(|r| !r.completed());
    Ok(if aborted && !expects_aborts { 1 } else { 0 })
}
