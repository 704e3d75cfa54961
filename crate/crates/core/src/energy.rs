//! Propulsion and communication energy of one hover mission and the
//! feasibility predicate against the battery and fuel budgets.
//!
//! A hover serves every GU of the request zone once, so per-task times are
//! multiplied by the number of tasks per mission (by default the expected GU
//! count `lambda_u * pi * R_u^2`).

use serde::{Deserialize, Serialize};

use crate::analysis::AnalysisParams;
use crate::channel::{max_service_radius, uplink_latency};
use crate::error::{ensure, Result};
use crate::quadrature::integrate;
use crate::units;

/// Which link distances stand in for the hover time of one task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum HoverTimePolicy {
    /// Edge GU (`r_u = R_u`) forwarding to the farthest admissible CN.
    #[default]
    WorstCase,
    /// GU averaged over the request zone, CN at the mean distance `2/3 r_c^max`
    /// of a point uniform in the admissible disk.
    Expected,
}

impl std::str::FromStr for HoverTimePolicy {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "worst_case" | "worst-case" => Ok(Self::WorstCase),
            "expected" => Ok(Self::Expected),
            other => Err(format!(
                "unknown hover time policy `{other}` (worst_case|expected)"
            )),
        }
    }
}

impl std::fmt::Display for HoverTimePolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::WorstCase => "worst_case",
            Self::Expected => "expected",
        })
    }
}

/// Rotorcraft constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyParams {
    /// Induced power correction factor `c`.
    pub correction_factor: f64,
    /// Take-off mass, kg.
    pub takeoff_mass: f64,
    /// m/s².
    pub gravity: f64,
    /// Air density, kg/m³.
    pub air_density: f64,
    /// Rotor disc area, m².
    pub rotor_disc_area: f64,
    pub profile_drag_coeff: f64,
    /// Blade area, m².
    pub blade_area: f64,
    /// Blade tip speed, m/s.
    pub tip_speed: f64,
    /// Take-off altitude `h_0`, m.
    pub initial_altitude: f64,
    pub hover_time_policy: HoverTimePolicy,
    /// Credit potential energy when the UAV descends below `h_0`.
    pub descent_credit: bool,
    /// Tasks served per mission; `None` uses the expected GU count.
    pub tasks_per_mission: Option<f64>,
}

impl Default for EnergyParams {
    fn default() -> Self {
        Self {
            correction_factor: 0.1,
            takeoff_mass: 26.0,
            gravity: 9.8,
            air_density: 1.225,
            rotor_disc_area: 1.0,
            profile_drag_coeff: 0.012,
            blade_area: 0.2,
            tip_speed: 250.0,
            initial_altitude: 50.0,
            hover_time_policy: HoverTimePolicy::WorstCase,
            descent_credit: false,
            tasks_per_mission: None,
        }
    }
}

impl EnergyParams {
    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v.is_finite() && v > 0.0;
        let nonneg = |v: f64| v.is_finite() && v >= 0.0;
        ensure(
            nonneg(self.correction_factor),
            "energy.correction_factor",
            "must be finite and >= 0",
        )?;
        ensure(
            pos(self.takeoff_mass),
            "energy.takeoff_mass",
            "must be finite and > 0",
        )?;
        ensure(
            pos(self.gravity),
            "energy.gravity",
            "must be finite and > 0",
        )?;
        ensure(
            pos(self.air_density),
            "energy.air_density",
            "must be finite and > 0",
        )?;
        ensure(
            pos(self.rotor_disc_area),
            "energy.rotor_disc_area",
            "must be finite and > 0",
        )?;
        ensure(
            nonneg(self.profile_drag_coeff),
            "energy.profile_drag_coeff",
            "must be finite and >= 0",
        )?;
        ensure(
            nonneg(self.blade_area),
            "energy.blade_area",
            "must be finite and >= 0",
        )?;
        ensure(
            nonneg(self.tip_speed),
            "energy.tip_speed",
            "must be finite and >= 0",
        )?;
        ensure(
            nonneg(self.initial_altitude),
            "energy.initial_altitude",
            "must be finite and >= 0",
        )?;
        if let Some(n) = self.tasks_per_mission {
            ensure(
                nonneg(n),
                "energy.tasks_per_mission",
                "must be finite and >= 0",
            )?;
        }
        Ok(())
    }

    /// UAV weight in newtons.
    pub fn weight(&self) -> f64 {
        self.takeoff_mass * self.gravity
    }

    pub fn induced_power(&self) -> f64 {
        (1.0 + self.correction_factor) * self.weight().powf(1.5)
            / (2.0 * self.air_density * self.rotor_disc_area).sqrt()
    }

    pub fn profile_power(&self) -> f64 {
        self.profile_drag_coeff * self.air_density * self.blade_area * self.tip_speed.powi(3) / 8.0
    }

    pub fn task_count(&self, params: &AnalysisParams) -> f64 {
        self.tasks_per_mission
            .unwrap_or_else(|| params.geometry.expected_gu_count())
    }
}

/// Battery (communication) and fuel (propulsion) budgets, J.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBudgets {
    pub battery: f64,
    pub fuel: f64,
}

impl EnergyBudgets {
    pub fn new(battery: f64, fuel: f64) -> Self {
        Self { battery, fuel }
    }

    pub fn unlimited() -> Self {
        Self::new(f64::INFINITY, f64::INFINITY)
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.battery >= 0.0, "budgets.battery", "must be >= 0")?;
        ensure(self.fuel >= 0.0, "budgets.fuel", "must be >= 0")
    }
}

impl Default for EnergyBudgets {
    fn default() -> Self {
        Self::unlimited()
    }
}

/// Hardware limits on transmit power (W) and altitude (m).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingBounds {
    pub power_min: f64,
    pub power_max: f64,
    pub altitude_min: f64,
    pub altitude_max: f64,
}

impl Default for OperatingBounds {
    fn default() -> Self {
        Self {
            power_min: units::dbw_to_watts(0.0),
            power_max: units::dbw_to_watts(30.0),
            altitude_min: 50.0,
            altitude_max: 800.0,
        }
    }
}

impl OperatingBounds {
    pub fn validate(&self) -> Result<()> {
        ensure(
            self.power_min > 0.0 && self.power_min <= self.power_max && self.power_max.is_finite(),
            "bounds.power",
            "need 0 < power_min <= power_max < inf",
        )?;
        ensure(
            self.altitude_min > 0.0
                && self.altitude_min <= self.altitude_max
                && self.altitude_max.is_finite(),
            "bounds.altitude",
            "need 0 < altitude_min <= altitude_max < inf",
        )
    }

    pub fn power_dbw(&self) -> (f64, f64) {
        (
            units::watts_to_dbw(self.power_min),
            units::watts_to_dbw(self.power_max),
        )
    }

    // Bounds arrive through dBW round trips, so allow a relative slack of 1e-9.
    pub fn contains_power(&self, p: f64) -> bool {
        p >= self.power_min * (1.0 - 1e-9) && p <= self.power_max * (1.0 + 1e-9)
    }

    pub fn contains_altitude(&self, h: f64) -> bool {
        h >= self.altitude_min * (1.0 - 1e-9) && h <= self.altitude_max * (1.0 + 1e-9)
    }
}

/// Induced plus blade-profile hover power, W.
pub fn hover_power(ep: &EnergyParams) -> f64 {
    ep.induced_power() + ep.profile_power()
}

/// Uplink and downlink time charged per task at `(p_d, h)`, s.
fn per_task_times(
    p_d: f64,
    h: f64,
    params: &AnalysisParams,
    policy: HoverTimePolicy,
) -> Result<(f64, f64)> {
    let params = params.at_operating_point(h, p_d);
    if params.task.data_size == 0.0 {
        return Ok((0.0, 0.0));
    }
    let downlink = params.downlink();
    match policy {
        HoverTimePolicy::WorstCase => {
            let r_u = params.geometry.request_radius;
            let t1 = uplink_latency(r_u, &params);
            let r_c = max_service_radius(r_u, &params)?;
            Ok((t1, downlink.latency(r_c)))
        }
        HoverTimePolicy::Expected => {
            let radius = params.geometry.request_radius;
            let opts = params.quadrature_options();
            let weight = 2.0 / (radius * radius);
            let t1 = integrate(
                |r| Ok(uplink_latency(r, &params) * r),
                0.0,
                radius,
                &[],
                &opts,
            )?;
            let t2 = integrate(
                |r| Ok(downlink.latency(2.0 / 3.0 * max_service_radius(r, &params)?) * r),
                0.0,
                radius,
                &[],
                &opts,
            )?;
            Ok((weight * t1.value, weight * t2.value))
        }
    }
}

/// Hover time `t_1 + t_2` charged to a single task, s. May be `+inf`.
pub fn hovering_duration(
    p_d: f64,
    h: f64,
    params: &AnalysisParams,
    policy: HoverTimePolicy,
) -> Result<f64> {
    let (t1, t2) = per_task_times(p_d, h, params, policy)?;
    Ok(t1 + t2)
}

/// Per-component energies of one mission.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub uplink_time: f64,
    pub downlink_time: f64,
    pub tasks: f64,
    pub hover: f64,
    pub climb: f64,
    pub propulsion: f64,
    pub communication: f64,
}

pub fn energy_breakdown(
    p_d: f64,
    h: f64,
    params: &AnalysisParams,
    ep: &EnergyParams,
) -> Result<EnergyBreakdown> {
    let (t1, t2) = per_task_times(p_d, h, params, ep.hover_time_policy)?;
    let tasks = ep.task_count(params);
    let hover = scaled(hover_power(ep) * tasks, t1 + t2);
    let climb = ep.weight() * (h - ep.initial_altitude);
    let climb = if ep.descent_credit {
        climb
    } else {
        climb.max(0.0)
    };
    Ok(EnergyBreakdown {
        uplink_time: t1,
        downlink_time: t2,
        tasks,
        hover,
        climb,
        propulsion: hover + climb,
        communication: scaled(p_d * tasks, t2),
    })
}

// `k * t` with an infinite time always infinite, even when `k` is zero.
fn scaled(k: f64, t: f64) -> f64 {
    if t.is_infinite() {
        f64::INFINITY
    } else {
        k * t
    }
}

/// Fuel drawn by hovering and climbing from `h_0` to `h`, J.
pub fn propulsion_energy(
    p_d: f64,
    h: f64,
    params: &AnalysisParams,
    ep: &EnergyParams,
) -> Result<f64> {
    energy_breakdown(p_d, h, params, ep).map(|e| e.propulsion)
}

/// Battery drawn by forwarding every task to its CN, J.
pub fn communication_energy(
    p_d: f64,
    h: f64,
    params: &AnalysisParams,
    ep: &EnergyParams,
) -> Result<f64> {
    energy_breakdown(p_d, h, params, ep).map(|e| e.communication)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Violation {
    Battery,
    Fuel,
    PowerBounds,
    AltitudeBounds,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Battery => "battery",
            Self::Fuel => "fuel",
            Self::PowerBounds => "power_bounds",
            Self::AltitudeBounds => "altitude_bounds",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub violations: Vec<Violation>,
    pub communication_energy: f64,
    pub propulsion_energy: f64,
    /// `battery - E_comm`; negative when violated.
    pub battery_slack: f64,
    /// `fuel - E_prop`; negative when violated.
    pub fuel_slack: f64,
}

/// Check the operating point against both budgets and the hardware bounds.
/// Infinite energies are infeasible even under infinite budgets.
pub fn is_feasible(
    p_d: f64,
    h: f64,
    budgets: &EnergyBudgets,
    bounds: &OperatingBounds,
    params: &AnalysisParams,
    ep: &EnergyParams,
) -> Result<FeasibilityReport> {
    let mut violations = Vec::new();
    if !bounds.contains_power(p_d) {
        violations.push(Violation::PowerBounds);
    }
    if !bounds.contains_altitude(h) {
        violations.push(Violation::AltitudeBounds);
    }
    let e = energy_breakdown(p_d, h, params, ep)?;
    if !(e.communication.is_finite() && e.communication <= budgets.battery) {
        violations.push(Violation::Battery);
    }
    if !(e.propulsion.is_finite() && e.propulsion <= budgets.fuel) {
        violations.push(Violation::Fuel);
    }
    Ok(FeasibilityReport {
        feasible: violations.is_empty(),
        violations,
        communication_energy: e.communication,
        propulsion_energy: e.propulsion,
        battery_slack: budgets.battery - e.communication,
        fuel_slack: budgets.fuel - e.propulsion,
    })
}
