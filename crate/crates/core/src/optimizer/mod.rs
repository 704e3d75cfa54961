//! Altitude and transmit-power placement under battery and fuel budgets.
//!
//! The objective is the spatially averaged success probability, forced to 0
//! at infeasible points. Internally the searches rank probes by a *score*
//! that equals the objective on feasible points and is strictly negative on
//! infeasible ones, shrinking towards 0 as the relative budget overrun
//! shrinks. This orders feasible points exactly like the hard-zero objective
//! while giving the searches a direction to walk out of an infeasible start.

mod bayes;
mod grid;
mod joint;
mod search;

pub use bayes::{bayesian_optimize, BayesConfig};
pub use grid::grid_search_oracle;
pub use joint::{
    baseline, joint_optimize, optimize_altitude, optimize_power, run_all_strategies, Baseline,
};
pub use search::{golden_section, quasi_newton, QuasiNewtonSettings, SearchOutcome};

use serde::{Deserialize, Serialize};

use crate::analysis::{average_success_probability, AnalysisParams};
use crate::energy::{is_feasible, EnergyBudgets, EnergyParams, FeasibilityReport, OperatingBounds};
use crate::error::{ensure, Result};
use crate::units;

/// Everything that defines one instance of the placement problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Problem {
    pub analysis: AnalysisParams,
    pub energy: EnergyParams,
    pub budgets: EnergyBudgets,
    pub bounds: OperatingBounds,
}

/// One evaluated operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub altitude: f64,
    pub power_dbw: f64,
    /// Constrained objective: success probability if feasible, else 0.
    pub objective: f64,
    pub feasible: bool,
    /// Search ranking; see the module docs.
    pub score: f64,
    pub battery_slack: f64,
    pub fuel_slack: f64,
}

impl Probe {
    /// A probe with no energy bookkeeping, for synthetic objectives.
    pub fn unconstrained(altitude: f64, power_dbw: f64, objective: f64) -> Self {
        Self {
            altitude,
            power_dbw,
            objective,
            feasible: true,
            score: objective,
            battery_slack: f64::INFINITY,
            fuel_slack: f64::INFINITY,
        }
    }

    pub fn power_watts(&self) -> f64 {
        units::dbw_to_watts(self.power_dbw)
    }

    pub(crate) fn beats(&self, other: &Probe) -> bool {
        self.score > other.score
    }
}

fn overrun(energy: f64, budget: f64) -> f64 {
    if energy <= budget {
        0.0
    } else if energy.is_infinite() {
        f64::INFINITY
    } else {
        (energy - budget) / budget.max(1.0)
    }
}

fn infeasibility_score(report: &FeasibilityReport, budgets: &EnergyBudgets) -> f64 {
    let v = overrun(report.communication_energy, budgets.battery)
        + overrun(report.propulsion_energy, budgets.fuel);
    let s = if v.is_infinite() { 1.0 } else { v / (1.0 + v) };
    -s.max(f64::MIN_POSITIVE)
}

impl Problem {
    pub fn new(
        analysis: AnalysisParams,
        energy: EnergyParams,
        budgets: EnergyBudgets,
        bounds: OperatingBounds,
    ) -> Self {
        Self {
            analysis,
            energy,
            budgets,
            bounds,
        }
    }

    pub fn with_budgets(&self, budgets: EnergyBudgets) -> Self {
        Self {
            budgets,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.analysis.validate()?;
        self.energy.validate()?;
        self.budgets.validate()?;
        self.bounds.validate()
    }

    /// Success probability ignoring every energy constraint.
    pub fn unconstrained_objective(&self, power_w: f64, altitude: f64) -> Result<f64> {
        average_success_probability(&self.analysis.at_operating_point(altitude, power_w))
    }

    pub fn feasibility(&self, power_w: f64, altitude: f64) -> Result<FeasibilityReport> {
        is_feasible(
            power_w,
            altitude,
            &self.budgets,
            &self.bounds,
            &self.analysis,
            &self.energy,
        )
    }

    /// Success probability if `(power_w, altitude)` is feasible, else 0.
    pub fn constrained_objective(&self, power_w: f64, altitude: f64) -> Result<f64> {
        if self.feasibility(power_w, altitude)?.feasible {
            self.unconstrained_objective(power_w, altitude)
        } else {
            Ok(0.0)
        }
    }

    /// Evaluate a point given in dBW. The success probability is skipped for
    /// infeasible points.
    pub fn probe(&self, altitude: f64, power_dbw: f64) -> Result<Probe> {
        let power_w = units::dbw_to_watts(power_dbw);
        let report = self.feasibility(power_w, altitude)?;
        let (objective, score) = if report.feasible {
            let v = self.unconstrained_objective(power_w, altitude)?;
            (v, v)
        } else {
            (0.0, infeasibility_score(&report, &self.budgets))
        };
        Ok(Probe {
            altitude,
            power_dbw,
            objective,
            feasible: report.feasible,
            score,
            battery_slack: report.battery_slack,
            fuel_slack: report.fuel_slack,
        })
    }
}

/// Tuning of the alternating optimizer. Bounds live in [`Problem`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub max_iter: usize,
    /// Stop once the best objective improved by less than this over `window`
    /// iterations.
    pub epsilon: f64,
    pub window: usize,
    pub initial_altitude: f64,
    pub initial_power_dbw: f64,
    pub fallback_altitude: f64,
    pub fallback_power_dbw: f64,
    /// Golden-section stopping width, m.
    pub altitude_tol: f64,
    pub golden_max_probes: usize,
    pub quasi_newton: QuasiNewtonSettings,
    /// Power offsets, dB, tried in order when an iteration stalls.
    pub escape_offsets_db: Vec<f64>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iter: 50,
            epsilon: 1e-4,
            window: 5,
            initial_altitude: 50.0,
            initial_power_dbw: 10.0,
            fallback_altitude: 50.0,
            fallback_power_dbw: 10.0,
            altitude_tol: 0.5,
            golden_max_probes: 40,
            quasi_newton: QuasiNewtonSettings::default(),
            escape_offsets_db: vec![1.0, 0.5, 0.25, 0.1],
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self, bounds: &OperatingBounds) -> Result<()> {
        ensure(self.max_iter >= 1, "optimizer.max_iter", "must be >= 1")?;
        ensure(self.epsilon > 0.0, "optimizer.epsilon", "must be > 0")?;
        ensure(self.window >= 1, "optimizer.window", "must be >= 1")?;
        ensure(
            self.altitude_tol > 0.0,
            "optimizer.altitude_tol",
            "must be > 0",
        )?;
        ensure(
            self.escape_offsets_db
                .iter()
                .all(|&d| d > 0.0 && d.is_finite()),
            "optimizer.escape_offsets_db",
            "must be finite and > 0",
        )?;
        ensure(
            self.golden_max_probes >= 2,
            "optimizer.golden_max_probes",
            "must be >= 2",
        )?;
        ensure(
            bounds.contains_altitude(self.fallback_altitude)
                && bounds.contains_power(units::dbw_to_watts(self.fallback_power_dbw)),
            "optimizer.fallback",
            "must lie inside the operating bounds",
        )?;
        self.quasi_newton.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Joint,
    PowerOnly,
    AltitudeOnly,
    Static,
    Bayesian,
    Grid,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Joint => "joint",
            Self::PowerOnly => "power_only",
            Self::AltitudeOnly => "altitude_only",
            Self::Static => "static",
            Self::Bayesian => "bayesian",
            Self::Grid => "grid",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iteration: usize,
    pub altitude: f64,
    pub power_dbw: f64,
    pub objective: f64,
    /// Best objective seen up to and including this entry.
    pub best_objective: f64,
    pub feasible: bool,
    pub battery_slack: f64,
    pub fuel_slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub method: Method,
    pub label: String,
    /// m.
    pub h_star: f64,
    /// W.
    pub p_star: f64,
    pub p_star_dbw: f64,
    pub objective: f64,
    pub feasible: bool,
    pub fallback_used: bool,
    pub iterations: usize,
    pub evaluations: usize,
    pub trace: Vec<TraceEntry>,
}

impl OptimizationResult {
    pub(crate) fn from_probe(method: Method, label: impl Into<String>, p: &Probe) -> Self {
        Self {
            method,
            label: label.into(),
            h_star: p.altitude,
            p_star: p.power_watts(),
            p_star_dbw: p.power_dbw,
            objective: p.objective,
            feasible: p.feasible,
            fallback_used: false,
            iterations: 0,
            evaluations: 0,
            trace: Vec::new(),
        }
    }
}

pub(crate) struct Tracer {
    pub entries: Vec<TraceEntry>,
    best: f64,
}

impl Tracer {
    pub fn new() -> Self {
        Self {
            entries: Vec::new(),
            best: 0.0,
        }
    }

    pub fn record(&mut self, iteration: usize, p: &Probe) {
        self.best = self.best.max(p.objective);
        self.entries.push(TraceEntry {
            iteration,
            altitude: p.altitude,
            power_dbw: p.power_dbw,
            objective: p.objective,
            best_objective: self.best,
            feasible: p.feasible,
            battery_slack: p.battery_slack,
            fuel_slack: p.fuel_slack,
        });
    }
}

/// Relative improvement of `p_joint` over `p_baseline`, in percent. `None`
/// when the baseline probability is 0 and the gain is undefined.
pub fn performance_gain(p_joint: f64, p_baseline: f64) -> Option<f64> {
    if p_baseline > 0.0 {
        Some((p_joint - p_baseline) / p_baseline * 100.0)
    } else {
        None
    }
}
