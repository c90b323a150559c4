//! Batch command-line interface.
//!
//! Exit codes: 0 success, 1 invalid input, 2 runtime or stability failure,
//! 3 an experiment verdict of FAIL. Diagnostics go to standard error and data
//! to files under the output directory; every file records the config digest
//! in its header.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use crate::config::{parse_config, RunConfig};
use crate::diagnostics::MomentRecord;
use crate::error::{Error, Result};
use crate::experiments::{
    constant_kernel_benchmark, longtime_first, longtime_zeroth, stability_experiment, truncation_convergence,
    ExperimentReport, Scenario, Verdict,
};
use crate::integrator::Trajectory;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;
pub const EXIT_FAIL: i32 = 3;

/// Names accepted by `experiments --select`.
pub const EXPERIMENTS: [&str; 5] = [
    "truncation_convergence",
    "stability",
    "longtime_zeroth",
    "longtime_first",
    "constant_kernel_benchmark",
];

/// Configuration used by `benchmark` when no `--config` is given: unit
/// constant kernel, unit exponential initial data, t in [0, 10].
pub const BENCHMARK_CONFIG: &str = r#"{
  "coagulation": {"kind": "constant", "params": {"value": 1}},
  "grid": {"u_max": 200, "cells": 400, "scheme": "geometric", "ratio": 1.035},
  "initial": {"kind": "exp_decay", "params": {"amplitude": 1, "scale": 1}},
  "stepper": {"t_end": 10, "output_spacing": 0.5},
  "experiment": {"benchmark_tolerance": 0.01, "overflow_budget": 0.0001},
  "output_dir": "out/benchmark"
}"#;

#[derive(Parser, Debug)]
#[command(
    name = "gcf",
    version,
    about = "Sectional solver for growth-coagulation-fragmentation with renewal"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct Common {
    /// JSON run configuration.
    #[arg(long, short)]
    config: PathBuf,
    /// Overrides `output_dir` from the configuration.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate and write moments.csv and one snapshot CSV per output time.
    Run {
        #[command(flatten)]
        common: Common,
        /// Also write moments.svg.
        #[arg(long)]
        plot: bool,
    },
    /// Check the coefficient hypotheses and write assumptions.json.
    CheckKernels {
        #[command(flatten)]
        common: Common,
    },
    /// Constant-kernel benchmark against the closed-form zeroth moment.
    Benchmark {
        #[arg(long, short)]
        config: Option<PathBuf>,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Run selected experiments, writing `<id>.json` for each.
    Experiments {
        #[command(flatten)]
        common: Common,
        /// Comma-separated experiment names; all when omitted.
        #[arg(long, value_delimiter = ',')]
        select: Vec<String>,
    },
    /// Truncation study over increasing levels.
    Convergence {
        #[command(flatten)]
        common: Common,
        /// Comma-separated truncation levels; config value when omitted.
        #[arg(long, value_delimiter = ',')]
        levels: Vec<f64>,
    },
}

/// Entry point for the binary; returns the process exit code.
pub fn main() -> i32 {
    main_with_args(std::env::args_os())
}

pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::ConfigParse { .. }
        | Error::ConfigInvalid(_)
        | Error::Parameter { .. }
        | Error::Probe(_)
        | Error::DimensionMismatch { .. }
        | Error::GridMismatch => EXIT_INVALID,
        Error::Hypothesis { .. } => EXIT_FAIL,
        _ => EXIT_RUNTIME,
    }
}

fn load(path: &Path, out: Option<PathBuf>) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::ConfigInvalid(vec![format!("{}: {e}", path.display())]))?;
    let mut cfg = parse_config(&text)?;
    if let Some(dir) = out {
        cfg.output_dir = dir;
    }
    fs::create_dir_all(&cfg.output_dir)?;
    Ok(cfg)
}

fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::Run { common, plot } => {
            let cfg = load(&common.config, common.out)?;
            let scenario = cfg.scenario()?;
            let (_, traj) = scenario.run()?;
            write_trajectory(&cfg.output_dir, &cfg.digest, &traj)?;
            if plot {
                fs::write(
                    cfg.output_dir.join("moments.svg"),
                    moment_svg(&cfg.digest, traj.moments()),
                )?;
            }
            eprintln!(
                "run: {} snapshots, {} steps ({} rejected) -> {}",
                traj.snapshots().len(),
                traj.steps,
                traj.rejected_steps,
                cfg.output_dir.display()
            );
            Ok(EXIT_OK)
        }
        Command::CheckKernels { common } => {
            let cfg = load(&common.config, common.out)?;
            let report = cfg.scenario()?.assumptions()?;
            let doc = serde_json::json!({ "config_digest": cfg.digest, "report": report });
            fs::write(
                cfg.output_dir.join("assumptions.json"),
                serde_json::to_string_pretty(&doc)?,
            )?;
            for e in &report.entries {
                eprintln!("{:<8} {}", e.id, if e.satisfied { "ok" } else { "violated" });
            }
            Ok(EXIT_OK)
        }
        Command::Benchmark { config, out } => {
            let mut cfg = match config {
                Some(path) => load(&path, None)?,
                None => parse_config(BENCHMARK_CONFIG)?,
            };
            if let Some(dir) = out {
                cfg.output_dir = dir;
            }
            fs::create_dir_all(&cfg.output_dir)?;
            let e = &cfg.experiment;
            let report = constant_kernel_benchmark(&cfg.scenario()?, e.benchmark_tolerance, e.overflow_budget)?;
            finish(&cfg.output_dir, vec![report])
        }
        Command::Experiments { common, select } => {
            let cfg = load(&common.config, common.out)?;
            let names: Vec<String> = if select.is_empty() {
                EXPERIMENTS.iter().map(|s| s.to_string()).collect()
            } else {
                select
            };
            if let Some(bad) = names.iter().find(|n| !EXPERIMENTS.contains(&n.as_str())) {
                eprintln!(
                    "error: unknown experiment `{bad}` (allowed: {})",
                    EXPERIMENTS.join(", ")
                );
                return Ok(EXIT_INVALID);
            }
            let scenario = cfg.scenario()?;
            let reports = names
                .par_iter()
                .map(|name| run_experiment(name, &scenario, &cfg))
                .collect::<Result<Vec<_>>>()?;
            finish(&cfg.output_dir, reports)
        }
        Command::Convergence { common, levels } => {
            let mut cfg = load(&common.config, common.out)?;
            if !levels.is_empty() {
                cfg.experiment.levels = levels;
            }
            let report = run_experiment("truncation_convergence", &cfg.scenario()?, &cfg)?;
            finish(&cfg.output_dir, vec![report])
        }
    }
}

/// Runs one named experiment; violated hypotheses become a FAIL report.
fn run_experiment(name: &str, scenario: &Scenario, cfg: &RunConfig) -> Result<ExperimentReport> {
    let e = &cfg.experiment;
    let result = match name {
        "truncation_convergence" => {
            truncation_convergence(scenario, &e.levels, e.growth_floor, e.convergence_tolerance)
        }
        "stability" => stability_experiment(scenario, &e.eps, e.max_spread),
        "longtime_zeroth" => longtime_zeroth(scenario, e.zeroth_fraction),
        "longtime_first" => longtime_first(scenario, e.slope_band, e.sqrt_growth),
        "constant_kernel_benchmark" => constant_kernel_benchmark(scenario, e.benchmark_tolerance, e.overflow_budget),
        other => unreachable!("unchecked experiment name {other}"),
    };
    match result {
        Err(err @ Error::Hypothesis { .. }) => Ok(ExperimentReport::hypothesis_failure(name, &cfg.digest, &err)),
        other => other,
    }
}

fn finish(dir: &Path, reports: Vec<ExperimentReport>) -> Result<i32> {
    let mut code = EXIT_OK;
    for r in &reports {
        fs::write(dir.join(format!("{}.json", r.id)), r.to_json()?)?;
        let label = match r.verdict {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Inconclusive => "INCONCLUSIVE",
        };
        eprintln!("{:<28} {label}", r.id);
        for note in &r.notes {
            eprintln!("    {note}");
        }
        if r.verdict == Verdict::Fail {
            code = EXIT_FAIL;
        }
    }
    Ok(code)
}

/// Writes `moments.csv` and `snapshot_NNNN.csv` files.
pub fn write_trajectory(dir: &Path, digest: &str, traj: &Trajectory) -> Result<()> {
    let mut csv = format!("# config_digest: {digest}\n{}\n", MomentRecord::CSV_HEADER);
    for r in traj.moments() {
        csv.push_str(&r.csv_row());
        csv.push('\n');
    }
    fs::write(dir.join("moments.csv"), csv)?;
    for (k, s) in traj.snapshots().iter().enumerate() {
        let mut out = format!("# config_digest: {digest}\n# t: {:e}\nu_pivot,xi\n", s.t);
        for (x, v) in s.grid().pivots().iter().zip(&s.xi) {
            let _ = writeln!(out, "{x:e},{v:e}");
        }
        fs::write(dir.join(format!("snapshot_{k:04}.csv")), out)?;
    }
    Ok(())
}

/// Line chart of M0, M1, M2, each scaled by its maximum.
pub fn moment_svg(digest: &str, moments: &[MomentRecord]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const PAD: f64 = 40.0;
    let t_max = moments.last().map(|r| r.t).filter(|t| *t > 0.0).unwrap_or(1.0);
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\">\n<!-- config_digest: {digest} -->\n\
         <rect x=\"{PAD}\" y=\"{PAD}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
        W - 2.0 * PAD,
        H - 2.0 * PAD
    );
    type Series = (&'static str, &'static str, fn(&MomentRecord) -> f64);
    let series: [Series; 3] = [
        ("M0", "#1f77b4", |r| r.m0),
        ("M1", "#d62728", |r| r.m1),
        ("M2", "#2ca02c", |r| r.m2),
    ];
    for (k, (name, color, get)) in series.iter().enumerate() {
        let max = moments.iter().map(get).fold(0.0, f64::max);
        let scale = if max > 0.0 { max } else { 1.0 };
        let points: Vec<String> = moments
            .iter()
            .map(|r| {
                let x = PAD + (W - 2.0 * PAD) * r.t / t_max;
                let y = H - PAD - (H - 2.0 * PAD) * get(r) / scale;
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(
            svg,
            "<polyline fill=\"none\" stroke=\"{color}\" points=\"{}\"/>\n<text x=\"{}\" y=\"{}\" fill=\"{color}\">{name}/max</text>",
            points.join(" "),
            W - PAD - 60.0,
            PAD + 16.0 * (k as f64 + 1.0)
        );
    }
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\">t in [0, {t_max}]</text>",
        W / 2.0 - 40.0,
        H - 10.0
    );
    svg.push_str("</svg>\n");
    svg
}
