//! Command-line interface.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;
use uavcpn::energy::FeasibilityReport;
use uavcpn::montecarlo::{default_window_radius, estimate_average_success};
use uavcpn::optimizer::{bayesian_optimize, joint_optimize, performance_gain, run_all_strategies};
use uavcpn::units::watts_to_dbw;
use uavcpn::{
    average_success_probability, max_service_radius, OptimizationResult, SuccessEstimate,
};

use crate::config::{key_listing, parse_config_with, ConfigError, RunConfig};
use crate::error::{HarnessError, Result};
use crate::figures::{reproduce_figure, FIGURES};
use crate::output::{create, Cell, Format, Record, Table};
use crate::sweep::run_sweep;

#[derive(Debug, Parser)]
#[command(
    name = "uavcpn",
    version,
    about = "Task completion probability and energy-aware placement for UAV computing networks"
)]
pub struct Cli {
    /// Config file (`key = value unit` lines); defaults fill every missing key.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Seed for simulation and Bayesian optimization; overrides the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Output directory. Single-run commands print to stdout without it.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_parser = ["mean_power", "bernoulli"])]
    pub channel_mode: Option<String>,

    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Override one config key, e.g. `--set "radio.uav_tx_power=20 dBW"`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analytic average task completion probability at the configured point.
    Analyze,
    /// Monte Carlo estimate with a 99% Wilson interval, next to the analytic value.
    Simulate,
    /// Joint altitude and power optimization under the configured budgets.
    Optimize,
    /// Joint optimization, the five fixed-variable baselines and Bayesian optimization.
    Baselines,
    /// Run the configured sweep and write a results table.
    Sweep,
    /// Write the data and plot description of a figure (`fig2` to `fig9`, or `all`).
    ReproduceFigure { id: String },
    /// Print the normalized configuration.
    Config,
    /// List every config key with its accepted units.
    Keys,
}

impl Cli {
    pub fn load_config(&self) -> Result<RunConfig> {
        let text = match &self.config {
            Some(path) => fs::read_to_string(path).map_err(|source| HarnessError::ReadConfig {
                path: path.clone(),
                source,
            })?,
            None => String::new(),
        };
        let mut overrides = Vec::new();
        for s in &self.set {
            let (k, v) = s.split_once('=').ok_or_else(|| ConfigError {
                line: None,
                path: s.clone(),
                message: "`--set` expects KEY=VALUE".into(),
            })?;
            overrides.push((k.trim().to_string(), v.trim().to_string()));
        }
        if let Some(seed) = self.seed {
            overrides.push(("seed".into(), seed.to_string()));
        }
        if let Some(mode) = &self.channel_mode {
            overrides.push(("channel_mode".into(), mode.clone()));
        }
        Ok(parse_config_with(&text, &overrides)?)
    }
}

#[derive(Debug, Serialize)]
struct AnalyzeResult {
    altitude_m: f64,
    uav_tx_power_w: f64,
    uav_tx_power_dbw: f64,
    average_success: f64,
    /// Largest admissible GU-to-CN reach for a GU under the UAV and at the zone edge.
    service_radius_center_m: f64,
    service_radius_edge_m: f64,
    feasibility: FeasibilityReport,
    constrained_objective: f64,
}

#[derive(Debug, Serialize)]
struct SimulateResult {
    analytic: f64,
    estimate: SuccessEstimate,
    window_radius_m: f64,
    analytic_inside_interval: bool,
}

#[derive(Debug, Serialize)]
struct StrategyReport {
    strategies: Vec<OptimizationResult>,
    /// Relative improvement of the joint result, percent; `null` when the
    /// other strategy scores zero.
    gains_pct: Vec<(String, Option<f64>)>,
}

fn strategy_table(results: &[OptimizationResult]) -> Table {
    Table {
        columns: [
            "method",
            "objective",
            "h [m]",
            "p [W]",
            "p [dBW]",
            "feasible",
            "fallback_used",
            "iterations",
            "evaluations",
        ]
        .map(String::from)
        .to_vec(),
        rows: results
            .iter()
            .map(|r| {
                vec![
                    Cell::Text(r.label.clone()),
                    r.objective.into(),
                    r.h_star.into(),
                    r.p_star.into(),
                    r.p_star_dbw.into(),
                    r.feasible.into(),
                    r.fallback_used.into(),
                    Cell::Int(r.iterations as u64),
                    Cell::Int(r.evaluations as u64),
                ]
            })
            .collect(),
    }
}

/// Prints or writes one result, as a JSON record or a CSV table.
fn emit<T: Serialize>(
    cfg: &RunConfig,
    out: Option<&Path>,
    name: &str,
    format: Format,
    value: &T,
    table: impl FnOnce() -> Table,
) -> Result<()> {
    let path = out.map(|d| d.join(format!("{name}.{}", format.extension())));
    let mut sink: Box<dyn Write> = match &path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(std::io::stdout().lock()),
    };
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut sink, &Record::new(cfg, value))?;
            writeln!(sink).ok();
        }
        Format::Csv => table().write_csv(&mut sink, &crate::output::Metadata::new(cfg))?,
    }
    if let Some(p) = path {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

/// Writes to stdout; a closed pipe (`uavcpn keys | head`) is not an error.
fn say(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

pub fn run(cli: &Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        // Fails only if a pool already exists, in which case it is kept.
        if rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .is_err()
        {
            log::warn!("thread pool already initialized; --threads ignored");
        }
    }
    if let Command::Keys = cli.command {
        let text: String = key_listing()
            .iter()
            .map(|(k, units)| format!("{k:36} {units}\n"))
            .collect();
        say(&text);
        return Ok(());
    }
    let cfg = cli.load_config()?;
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Keys => unreachable!(),
        Command::Config => {
            say(&format!("{}# hash {}\n", cfg.to_text(), cfg.hash()));
            Ok(())
        }
        Command::Analyze => {
            let p = &cfg.problem;
            let a = &p.analysis;
            let (pw, h) = (a.radio.uav_tx_power, a.geometry.altitude);
            let r = AnalyzeResult {
                altitude_m: h,
                uav_tx_power_w: pw,
                uav_tx_power_dbw: watts_to_dbw(pw),
                average_success: average_success_probability(a)?,
                service_radius_center_m: max_service_radius(0.0, a)?,
                service_radius_edge_m: max_service_radius(a.geometry.request_radius, a)?,
                feasibility: p.feasibility(pw, h)?,
                constrained_objective: p.constrained_objective(pw, h)?,
            };
            emit(
                &cfg,
                out,
                "analyze",
                cli.format.unwrap_or(Format::Json),
                &r,
                || Table {
                    columns: ["h [m]", "p [W]", "analytic", "constrained", "feasible"]
                        .map(String::from)
                        .to_vec(),
                    rows: vec![vec![
                        h.into(),
                        pw.into(),
                        r.average_success.into(),
                        r.constrained_objective.into(),
                        r.feasibility.feasible.into(),
                    ]],
                },
            )
        }
        Command::Simulate => {
            let a = &cfg.problem.analysis;
            let analytic = average_success_probability(a)?;
            let estimate = estimate_average_success(&cfg.sim, a)?;
            let window = match cfg.sim.window_radius {
                Some(w) => w,
                None => default_window_radius(a, cfg.sim.channel_mode)?,
            };
            let r = SimulateResult {
                analytic,
                estimate,
                window_radius_m: window,
                analytic_inside_interval: estimate.contains(analytic),
            };
            emit(
                &cfg,
                out,
                "simulate",
                cli.format.unwrap_or(Format::Json),
                &r,
                || Table {
                    columns: [
                        "analytic",
                        "mc_estimate",
                        "mc_ci_low",
                        "mc_ci_high",
                        "mc_samples",
                    ]
                    .map(String::from)
                    .to_vec(),
                    rows: vec![vec![
                        analytic.into(),
                        estimate.value.into(),
                        estimate.ci_low.into(),
                        estimate.ci_high.into(),
                        Cell::Int(estimate.trials),
                    ]],
                },
            )
        }
        Command::Optimize => {
            let r = joint_optimize(&cfg.problem, &cfg.optimizer)?;
            emit(
                &cfg,
                out,
                "optimize",
                cli.format.unwrap_or(Format::Json),
                &r,
                || strategy_table(std::slice::from_ref(&r)),
            )
        }
        Command::Baselines => {
            let mut strategies = run_all_strategies(&cfg.problem, &cfg.optimizer)?;
            strategies.push(bayesian_optimize(&cfg.problem, &cfg.bayes)?);
            let joint = strategies[0].objective;
            let gains_pct = strategies[1..]
                .iter()
                .map(|s| (s.label.clone(), performance_gain(joint, s.objective)))
                .collect();
            let r = StrategyReport {
                strategies,
                gains_pct,
            };
            emit(
                &cfg,
                out,
                "baselines",
                cli.format.unwrap_or(Format::Json),
                &r,
                || strategy_table(&r.strategies),
            )
        }
        Command::Sweep => {
            let format = cli.format.unwrap_or(Format::Csv);
            let dir = out
                .map(Path::to_path_buf)
                .unwrap_or_else(|| PathBuf::from(&cfg.output_dir));
            let path = dir.join(format!("{}_sweep.{}", cfg.scenario, format.extension()));
            let table = run_sweep(&cfg);
            let failed = table
                .column("error")
                .map(|c| c.iter().filter(|x| !matches!(x, Cell::Empty)).count())
                .unwrap_or(0);
            table.write(&path, format, &cfg)?;
            if failed > 0 {
                log::warn!(
                    "{failed} of {} sweep points reported errors",
                    table.rows.len()
                );
            }
            say(&format!("{}\n", path.display()));
            Ok(())
        }
        Command::ReproduceFigure { id } => {
            let dir = out
                .map(Path::to_path_buf)
                .unwrap_or_else(|| PathBuf::from(&cfg.output_dir));
            let ids: Vec<&str> = if id == "all" {
                FIGURES.to_vec()
            } else {
                vec![id.as_str()]
            };
            for id in ids {
                for p in reproduce_figure(id, &cfg, &dir)? {
                    say(&format!("{}\n", p.display()));
                }
            }
            Ok(())
        }
    }
}
