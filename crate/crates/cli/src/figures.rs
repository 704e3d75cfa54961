//! Figure data: each figure is a sweep plus a declarative plot description.
//!
//! Nothing is rendered here. `<id>.csv` holds the numbers and
//! `<id>.plot.json` says which columns go on which axis, so any plotting
//! tool can draw the figure.

use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use uavcpn::optimizer::Baseline;
use uavcpn::units::dbw_to_watts;
use uavcpn::{average_success_probability, ComputeModel, EnergyBudgets};

use crate::config::{Axis, AxisSpec, Output, RunConfig};
use crate::error::{HarnessError, Result};
use crate::output::{write_json_file, Format, Metadata, Table};
use crate::sweep::run_sweep;

pub const FIGURES: [&str; 8] = [
    "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9",
];

const ALTITUDE: &str = "geometry.altitude [m]";
const BATTERY: &str = "budgets.battery [J]";
const FUEL: &str = "budgets.fuel [J]";

/// Budgets used by the energy-tradeoff surface when the config leaves them open.
const FIG5_BUDGETS: EnergyBudgets = EnergyBudgets {
    battery: 40.0,
    fuel: 40_000.0,
};

pub struct Figure {
    pub config: RunConfig,
    pub table: Table,
    pub plot: Value,
}

fn axis(path: &str, spec: AxisSpec) -> Axis {
    Axis {
        path: path.into(),
        spec,
    }
}

fn altitude_axis(cfg: &RunConfig) -> Axis {
    axis(
        "geometry.altitude",
        AxisSpec::Linspace {
            start: 50.0,
            stop: 800.0,
            n: cfg.figure_altitude_points,
        },
    )
}

fn budget_axes(cfg: &RunConfig) -> Vec<Axis> {
    let n = cfg.figure_budget_points;
    vec![
        axis(
            "budgets.battery",
            AxisSpec::Linspace {
                start: 20.0,
                stop: 120.0,
                n,
            },
        ),
        axis(
            "budgets.fuel",
            AxisSpec::Linspace {
                start: 30_000.0,
                stop: 60_000.0,
                n,
            },
        ),
    ]
}

fn derived(cfg: &RunConfig, sweep: Vec<Axis>, outputs: Vec<Output>) -> RunConfig {
    let mut d = cfg.clone();
    d.sweep = sweep;
    d.outputs = outputs;
    d
}

fn with_latency(cfg: &RunConfig, latency: f64) -> RunConfig {
    let mut d = cfg.clone();
    d.problem.analysis.compute = ComputeModel {
        distribution: ComputeModel::deterministic(latency).distribution,
        ..cfg.problem.analysis.compute.clone()
    };
    d
}

fn numbers(t: &Table, column: &str) -> Vec<Option<f64>> {
    t.column(column)
        .map(|c| c.into_iter().map(|x| x.as_f64()).collect())
        .unwrap_or_default()
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| s / n as f64)
}

fn heatmap(title: &str, z: &str, label: &str) -> Value {
    json!({ "title": title, "z": { "column": z, "label": label } })
}

fn budget_plot(panels: Vec<Value>) -> Value {
    json!({
        "type": "heatmap",
        "x": { "column": BATTERY, "label": "Battery energy budget (J)" },
        "y": { "column": FUEL, "label": "Fuel energy budget (J)" },
        "panels": panels,
        "missing": "empty cells mark undefined values (infeasible baseline or failed run)",
    })
}

pub fn build_figure(id: &str, cfg: &RunConfig) -> Result<Figure> {
    let (config, mut plot) = match id {
        "fig2" => {
            let mut d = derived(
                cfg,
                vec![
                    axis("compute.latency", AxisSpec::Values(vec![0.2e-3, 2e-3])),
                    altitude_axis(cfg),
                ],
                vec![Output::Analytic, Output::MonteCarlo],
            );
            d = with_latency(&d, 2e-3);
            let mut series = Vec::new();
            for (tc, label) in [(0.2e-3, "0.2 ms"), (2e-3, "2 ms")] {
                let filter = json!({ "compute.latency [s]": tc });
                series.push(json!({
                    "label": format!("Theory, t_c = {label}"),
                    "filter": filter, "y": "analytic", "style": "line",
                }));
                series.push(json!({
                    "label": format!("Monte Carlo, t_c = {label}"),
                    "filter": filter, "y": "mc_estimate",
                    "y_low": "mc_ci_low", "y_high": "mc_ci_high", "style": "markers",
                }));
            }
            let plot = json!({
                "type": "line",
                "title": "Task completion probability vs. UAV altitude",
                "x": { "column": ALTITUDE, "label": "UAV altitude (m)" },
                "y": { "label": "Average task completion probability", "range": [0.0, 1.0] },
                "series": series,
            });
            (d, plot)
        }
        "fig3" => {
            let d = derived(
                cfg,
                vec![
                    axis(
                        "geometry.cn_density",
                        AxisSpec::Linspace {
                            start: 1e-6,
                            stop: 20e-6,
                            n: 20,
                        },
                    ),
                    altitude_axis(cfg),
                ],
                vec![Output::Analytic],
            );
            let plot = json!({
                "type": "surface",
                "title": "Task completion probability vs. CN density and UAV altitude",
                "x": { "column": ALTITUDE, "label": "UAV altitude (m)" },
                "y": { "column": "geometry.cn_density [per_m2]", "label": "CN density (per m^2)" },
                "z": { "column": "analytic", "label": "Average task completion probability" },
            });
            (d, plot)
        }
        "fig4" => {
            let d = with_latency(
                &derived(
                    cfg,
                    vec![
                        axis(
                            "geometry.service_cap",
                            AxisSpec::Linspace {
                                start: 200.0,
                                stop: 1000.0,
                                n: 9,
                            },
                        ),
                        altitude_axis(cfg),
                    ],
                    vec![Output::Analytic],
                ),
                0.2e-3,
            );
            let at = |cap: f64| -> Result<f64> {
                let mut a = d.problem.analysis.clone();
                a.geometry.altitude = 300.0;
                a.geometry.service_cap = Some(cap);
                Ok(average_success_probability(&a)?)
            };
            let (small, large) = (at(200.0)?, at(1000.0)?);
            let plot = json!({
                "type": "surface",
                "title": "Task completion probability vs. CN distribution radius and UAV altitude",
                "x": { "column": ALTITUDE, "label": "UAV altitude (m)" },
                "y": { "column": "geometry.service_cap [m]", "label": "CN distribution radius (m)" },
                "z": { "column": "analytic", "label": "Average task completion probability" },
                "annotations": {
                    "altitude_m": 300.0,
                    "radius_200m": small,
                    "radius_1000m": large,
                    "ratio": large / small,
                },
            });
            (d, plot)
        }
        "fig5" => {
            let mut d = derived(
                cfg,
                vec![
                    axis(
                        "radio.uav_tx_power",
                        AxisSpec::Logspace {
                            start: 1.0,
                            stop: 1000.0,
                            n: 16,
                        },
                    ),
                    altitude_axis(cfg),
                ],
                vec![Output::Analytic, Output::Feasibility],
            );
            if d.problem.budgets.battery.is_infinite() && d.problem.budgets.fuel.is_infinite() {
                d.problem.budgets = FIG5_BUDGETS;
            }
            let p = d.problem.clone();
            let pw = dbw_to_watts(30.0);
            let plot = json!({
                "type": "surface",
                "title": "Task completion probability vs. transmit power and altitude",
                "x": { "column": ALTITUDE, "label": "UAV altitude (m)" },
                "y": { "column": "radio.uav_tx_power [W]", "label": "UAV transmit power (W)", "scale": "log" },
                "panels": [
                    { "title": "Without energy constraints", "z": { "column": "analytic" } },
                    { "title": "With energy constraints", "z": { "column": "constrained" } },
                ],
                "annotations": {
                    "budgets_j": { "battery": p.budgets.battery, "fuel": p.budgets.fuel },
                    "point_30dBW_310m": {
                        "unconstrained": p.unconstrained_objective(pw, 310.0)?,
                        "constrained": p.constrained_objective(pw, 310.0)?,
                    },
                },
            });
            (d, plot)
        }
        "fig6" | "fig7" => {
            let d = derived(
                cfg,
                budget_axes(cfg),
                vec![Output::Joint, Output::Baselines],
            );
            let labels: Vec<String> = Baseline::standard().iter().map(Baseline::label).collect();
            let panels = if id == "fig6" {
                labels
                    .iter()
                    .map(|l| {
                        heatmap(
                            &format!("Gain over {l}"),
                            &format!("gain_vs_{l} [%]"),
                            "Gain (%)",
                        )
                    })
                    .collect()
            } else {
                std::iter::once("joint".to_string())
                    .chain(labels.iter().cloned())
                    .map(|l| heatmap(&l, &format!("{l}_objective"), "Task completion probability"))
                    .collect()
            };
            let mut plot = budget_plot(panels);
            plot["title"] = json!(if id == "fig6" {
                "Gain of joint optimization over baseline strategies"
            } else {
                "Task completion probability per strategy"
            });
            (d, plot)
        }
        "fig8" => {
            let d = derived(cfg, budget_axes(cfg), vec![Output::Joint]);
            let mut plot = budget_plot(vec![
                heatmap(
                    "Optimized probability",
                    "joint_objective",
                    "Task completion probability",
                ),
                heatmap("Optimized altitude", "joint_h [m]", "Altitude (m)"),
                heatmap(
                    "Optimized transmit power",
                    "joint_p [dBW]",
                    "Transmit power (dBW)",
                ),
            ]);
            plot["title"] = json!("Joint optimization over energy budgets");
            (d, plot)
        }
        "fig9" => {
            let d = derived(cfg, budget_axes(cfg), vec![Output::Joint, Output::Bayesian]);
            let mut plot = budget_plot(vec![
                heatmap(
                    "Optimized probability",
                    "bayesian_objective",
                    "Task completion probability",
                ),
                heatmap("Optimized altitude", "bayesian_h [m]", "Altitude (m)"),
                heatmap(
                    "Optimized transmit power",
                    "bayesian_p [dBW]",
                    "Transmit power (dBW)",
                ),
            ]);
            plot["title"] = json!("Bayesian optimization over energy budgets");
            (d, plot)
        }
        other => return Err(HarnessError::UnknownFigure(other.to_string())),
    };

    let table = run_sweep(&config);
    summarize(id, &table, &mut plot);
    plot["figure"] = json!(id);
    plot["data"] = json!(format!("{id}.csv"));
    plot["metadata"] = serde_json::to_value(Metadata::new(&config))?;
    plot["config"] = json!(config.to_text());
    Ok(Figure {
        config,
        table,
        plot,
    })
}

/// Headline numbers computed from the figure's own table.
fn summarize(id: &str, t: &Table, plot: &mut Value) {
    match id {
        "fig5" => {
            let free = numbers(t, "analytic");
            let cons = numbers(t, "constrained");
            let drop = mean(free.iter().zip(&cons).filter_map(|(a, b)| match (a, b) {
                (Some(a), Some(b)) if *a > 0.0 => Some((a - b) / a),
                _ => None,
            }));
            plot["annotations"]["mean_relative_drop"] = json!(drop);
        }
        "fig6" | "fig7" => {
            let mut stats = serde_json::Map::new();
            for b in Baseline::standard() {
                let l = b.label();
                let gains: Vec<f64> = numbers(t, &format!("gain_vs_{l} [%]"))
                    .into_iter()
                    .flatten()
                    .collect();
                let feasible = t.column(&format!("{l}_feasible")).unwrap_or_default();
                let infeasible = feasible
                    .iter()
                    .filter(|c| matches!(c, crate::output::Cell::Bool(false)))
                    .count();
                stats.insert(
                    l,
                    json!({
                        "mean_gain_pct": mean(gains.iter().copied()),
                        "max_gain_pct": gains.iter().copied().fold(None, |m: Option<f64>, g| Some(m.map_or(g, |m| m.max(g)))),
                        "infeasible_fraction": infeasible as f64 / feasible.len().max(1) as f64,
                    }),
                );
            }
            plot["annotations"] = Value::Object(stats);
        }
        "fig9" => {
            let joint = numbers(t, "joint_objective");
            let bo = numbers(t, "bayesian_objective");
            let pairs: Vec<(f64, f64)> = joint
                .iter()
                .zip(&bo)
                .filter_map(|(a, b)| Some(((*a)?, (*b)?)))
                .collect();
            let wins = pairs.iter().filter(|(j, b)| j >= b).count();
            plot["annotations"] = json!({
                "joint_beats_or_ties_fraction": wins as f64 / pairs.len().max(1) as f64,
                "mean_difference": mean(pairs.iter().map(|(j, b)| j - b)),
            });
        }
        _ => {}
    }
}

/// Writes `<id>.csv` and `<id>.plot.json` under `out_dir`.
pub fn reproduce_figure(id: &str, cfg: &RunConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let fig = build_figure(id, cfg)?;
    let data = out_dir.join(format!("{id}.csv"));
    fig.table.write(&data, Format::Csv, &fig.config)?;
    let spec = write_json_file(&out_dir.join(format!("{id}.plot.json")), &fig.plot)?;
    Ok(vec![data, spec])
}
