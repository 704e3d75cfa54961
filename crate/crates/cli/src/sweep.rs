//! Cartesian parameter sweeps.

use rayon::prelude::*;
use uavcpn::montecarlo::estimate_average_success;
use uavcpn::optimizer::{
    baseline, bayesian_optimize, grid_search_oracle, joint_optimize, performance_gain, Baseline,
};
use uavcpn::{average_success_probability, OptimizationResult};

use crate::config::{Output, RunConfig};
use crate::output::{Cell, Table};

/// Every combination of the axis values, first axis slowest.
pub fn sweep_points(cfg: &RunConfig) -> Vec<Vec<f64>> {
    let mut points = vec![Vec::new()];
    for axis in &cfg.sweep {
        let values = axis.values();
        points = points
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    points
}

fn strategy_columns(label: &str) -> Vec<String> {
    vec![
        format!("{label}_objective"),
        format!("{label}_h [m]"),
        format!("{label}_p [dBW]"),
        format!("{label}_feasible"),
    ]
}

fn strategy_cells(r: &OptimizationResult) -> Vec<Cell> {
    vec![
        r.objective.into(),
        r.h_star.into(),
        r.p_star_dbw.into(),
        r.feasible.into(),
    ]
}

fn uses_seed(cfg: &RunConfig) -> bool {
    cfg.outputs
        .iter()
        .any(|o| matches!(o, Output::MonteCarlo | Output::Bayesian))
}

pub fn columns(cfg: &RunConfig) -> Vec<String> {
    let mut cols: Vec<String> = cfg.sweep.iter().map(|a| a.column()).collect();
    let joint = cfg.outputs.contains(&Output::Joint);
    for o in &cfg.outputs {
        match o {
            Output::Analytic => cols.push("analytic".into()),
            Output::MonteCarlo => cols
                .extend(["mc_estimate", "mc_ci_low", "mc_ci_high", "mc_samples"].map(String::from)),
            Output::Feasibility => cols.extend(
                [
                    "feasible",
                    "constrained",
                    "e_comm [J]",
                    "e_prop [J]",
                    "battery_slack [J]",
                    "fuel_slack [J]",
                ]
                .map(String::from),
            ),
            Output::Joint => {
                cols.extend(strategy_columns("joint"));
                cols.push("joint_fallback".into());
            }
            Output::Baselines => {
                for b in Baseline::standard() {
                    cols.extend(strategy_columns(&b.label()));
                    if joint {
                        cols.push(format!("gain_vs_{} [%]", b.label()));
                    }
                }
            }
            Output::Bayesian => cols.extend(strategy_columns("bayesian")),
            Output::Grid => cols.extend(strategy_columns("grid")),
        }
    }
    if uses_seed(cfg) {
        cols.push("point_seed".into());
    }
    cols.push("error".into());
    cols
}

/// Runs every sweep point. A point that fails leaves its cells empty and
/// explains why in the `error` column; the other points are unaffected.
pub fn run_sweep(cfg: &RunConfig) -> Table {
    let points = sweep_points(cfg);
    let rows = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| evaluate_point(cfg, p, i))
        .collect();
    Table {
        columns: columns(cfg),
        rows,
    }
}

fn evaluate_point(cfg: &RunConfig, point: &[f64], index: usize) -> Vec<Cell> {
    let mut row: Vec<Cell> = point.iter().map(|&v| Cell::Num(v)).collect();
    let mut errors: Vec<String> = Vec::new();
    let seed = cfg.seed.wrapping_add(index as u64);

    let mut local = cfg.clone();
    let setup = cfg
        .sweep
        .iter()
        .zip(point)
        .try_for_each(|(axis, &v)| local.set_path(&axis.path, v))
        .and_then(|_| local.validate());
    if let Err(e) = setup {
        let n = columns(cfg).len() - row.len() - 1;
        row.extend(std::iter::repeat_n(Cell::Empty, n));
        row.push(Cell::Text(e.to_string()));
        return row;
    }
    local.sim.seed = seed;
    local.bayes.seed = seed;
    let problem = &local.problem;
    let analysis = &problem.analysis;

    let mut joint: Option<OptimizationResult> = None;
    for o in &cfg.outputs {
        let width = match o {
            Output::Analytic => 1,
            Output::MonteCarlo => 4,
            Output::Feasibility => 6,
            Output::Joint => 5,
            Output::Baselines => {
                5 * if cfg.outputs.contains(&Output::Joint) {
                    5
                } else {
                    4
                }
            }
            Output::Bayesian | Output::Grid => 4,
        };
        let cells: Result<Vec<Cell>, String> = (|| match o {
            Output::Analytic => Ok(vec![average_success_probability(analysis)
                .map_err(|e| e.to_string())?
                .into()]),
            Output::MonteCarlo => {
                let est =
                    estimate_average_success(&local.sim, analysis).map_err(|e| e.to_string())?;
                Ok(vec![
                    est.value.into(),
                    est.ci_low.into(),
                    est.ci_high.into(),
                    Cell::Int(est.trials),
                ])
            }
            Output::Feasibility => {
                let (p, h) = (analysis.radio.uav_tx_power, analysis.geometry.altitude);
                let rep = problem.feasibility(p, h).map_err(|e| e.to_string())?;
                let obj = problem
                    .constrained_objective(p, h)
                    .map_err(|e| e.to_string())?;
                Ok(vec![
                    rep.feasible.into(),
                    obj.into(),
                    rep.communication_energy.into(),
                    rep.propulsion_energy.into(),
                    rep.battery_slack.into(),
                    rep.fuel_slack.into(),
                ])
            }
            Output::Joint => {
                let r = joint_optimize(problem, &local.optimizer).map_err(|e| e.to_string())?;
                let mut c = strategy_cells(&r);
                c.push(r.fallback_used.into());
                joint = Some(r);
                Ok(c)
            }
            Output::Baselines => {
                let mut c = Vec::new();
                for kind in Baseline::standard() {
                    let b = baseline(kind, problem, &local.optimizer).map_err(|e| e.to_string())?;
                    c.extend(strategy_cells(&b));
                    if cfg.outputs.contains(&Output::Joint) {
                        let gain = joint
                            .as_ref()
                            .and_then(|j| performance_gain(j.objective, b.objective));
                        c.push(gain.into());
                    }
                }
                Ok(c)
            }
            Output::Bayesian => {
                let r = bayesian_optimize(problem, &local.bayes).map_err(|e| e.to_string())?;
                Ok(strategy_cells(&r))
            }
            Output::Grid => {
                let r = grid_search_oracle(
                    problem,
                    local.oracle_altitude_points,
                    local.oracle_power_points,
                )
                .map_err(|e| e.to_string())?;
                Ok(strategy_cells(&r))
            }
        })();
        match cells {
            Ok(c) => {
                debug_assert_eq!(c.len(), width);
                row.extend(c);
            }
            Err(e) => {
                row.extend(std::iter::repeat_n(Cell::Empty, width));
                errors.push(format!("{}: {e}", o.name()));
            }
        }
    }
    if uses_seed(cfg) {
        row.push(Cell::Int(seed));
    }
    row.push(if errors.is_empty() {
        Cell::Empty
    } else {
        Cell::Text(errors.join("; "))
    });
    row
}
