mod report;
mod run;
mod scenario;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use polyapprox::shape::constants;
use rayon::prelude::*;
use serde_json::json;

use crate::report::Report;
use crate::run::{run_scenario, RunConfig};
use crate::scenario::{Scenario, ScenarioError};

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;

/// Polytope approximation of convex bodies: run scenarios and check bounds.
#[derive(Debug, Parser)]
#[command(name = "polyapprox", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Override the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Multiply every Monte-Carlo sample count.
    #[arg(long, global = true, default_value_t = 1.0)]
    samples_scale: f64,
    /// Write `<name>.json` and `<name>.csv` reports into this directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario file.
    Run { scenario: PathBuf },
    /// Run every `*.json` scenario in a directory.
    Suite { dir: PathBuf },
    /// Print the dimension constants.
    Constants {
        #[arg(long)]
        dim: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if !(cli.samples_scale > 0.0 && cli.samples_scale.is_finite()) {
        eprintln!("error: --samples-scale must be positive");
        return ExitCode::from(EXIT_USAGE);
    }
    if let Some(out) = &cli.out {
        if let Err(e) = std::fs::create_dir_all(out) {
            eprintln!("error: {}: {e}", out.display());
            return ExitCode::from(EXIT_USAGE);
        }
    }
    let cfg = RunConfig { seed: cli.seed, samples_scale: cli.samples_scale };
    match &cli.command {
        Command::Run { scenario } => run_one(scenario, &cfg, cli.out.as_deref()),
        Command::Suite { dir } => run_suite(dir, &cfg, cli.out.as_deref()),
        Command::Constants { dim } => match constants(*dim) {
            Ok(table) => {
                println!("{}", serde_json::to_string_pretty(&table).expect("table serializes"));
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_USAGE)
            }
        },
    }
}

fn write_outputs(report: &Report, out: &Path) -> Result<(), String> {
    let stem = out.join(&report.scenario.name);
    report.write_json(&stem.with_extension("json")).map_err(|e| e.to_string())?;
    report.write_csv(&stem.with_extension("csv")).map_err(|e| e.to_string())
}

fn summary_line(r: &Report) -> String {
    let failed = r.results.iter().filter(|c| !c.pass).count();
    let status = if r.passed { "PASS" } else { "FAIL" };
    let mut line = format!("{status} {} ({} checks, {failed} failed, {:.1}s)", r.scenario.name, r.results.len(), r.elapsed_secs);
    if let Some(e) = &r.error {
        line.push_str(&format!(": {e}"));
    }
    line
}

fn run_one(path: &Path, cfg: &RunConfig, out: Option<&Path>) -> ExitCode {
    let scenario = match Scenario::load(path) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let report = run_scenario(&scenario, cfg);
    match out {
        Some(dir) => {
            if let Err(e) = write_outputs(&report, dir) {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_FAIL);
            }
            println!("{}", summary_line(&report));
        }
        None => println!("{}", serde_json::to_string_pretty(&report).expect("report serializes")),
    }
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAIL)
    }
}

fn scenario_files(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    Ok(files)
}

fn run_suite(dir: &Path, cfg: &RunConfig, out: Option<&Path>) -> ExitCode {
    let files = match scenario_files(dir) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {}: {e}", dir.display());
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let outcomes: Vec<Result<(Report, Option<String>), ScenarioError>> = files
        .par_iter()
        .map(|path| {
            let scenario = Scenario::load(path)?;
            let report = run_scenario(&scenario, cfg);
            let write_error = out.and_then(|dir| write_outputs(&report, dir).err());
            Ok((report, write_error))
        })
        .collect();

    let (mut passed, mut failed, mut invalid) = (0, 0, 0);
    let mut entries = Vec::new();
    for outcome in &outcomes {
        match outcome {
            Ok((report, write_error)) => {
                println!("{}", summary_line(report));
                if let Some(e) = write_error {
                    eprintln!("error: {e}");
                }
                if report.passed && write_error.is_none() {
                    passed += 1;
                } else {
                    failed += 1;
                }
                entries.push(json!({ "name": report.scenario.name, "passed": report.passed, "error": report.error }));
            }
            Err(e) => {
                eprintln!("error: {e}");
                invalid += 1;
            }
        }
    }
    println!("{} scenarios: {passed} passed, {failed} failed, {invalid} invalid", outcomes.len());
    if let Some(dir) = out {
        let summary = json!({ "scenarios": outcomes.len(), "passed": passed, "failed": failed, "invalid": invalid, "results": entries });
        let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
        if let Err(e) = std::fs::write(dir.join("summary.json"), text + "\n") {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_FAIL);
        }
    }
    if invalid > 0 {
        ExitCode::from(EXIT_USAGE)
    } else if failed > 0 {
        ExitCode::from(EXIT_FAIL)
    } else {
        ExitCode::SUCCESS
    }
}
