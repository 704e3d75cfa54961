//! Semi-analytical task completion probability.
//!
//! CNs form a homogeneous PPP. A CN at horizontal distance `r_c` from the UAV
//! can serve a GU at distance `r_u` if it lies inside the communication
//! radius `r_c^max(r_u)` and finishes computing within the residual budget
//! `T_max - t_1(r_u) - t_2(r_c)`. Independent thinning by that retention
//! probability leaves a PPP whose mean count is the qualified intensity
//! `Lambda(r_u)`, so the per-GU success probability is the complement of the
//! void probability, `1 - exp(-Lambda(r_u))`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::channel::{
    radius_for_budget, uplink_latency, EnvironmentParams, GeometryParams, Link, RadioParams,
    RadiusSolver, TaskSpec,
};
use crate::compute::ComputeModel;
use crate::error::{ensure, Result};
use crate::quadrature::{integrate, QuadratureOptions};

/// Every model constant needed to evaluate the success probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisParams {
    pub env: EnvironmentParams,
    /// LoS parameters for the UAV-to-CN hop; `None` reuses `env`.
    pub downlink_env: Option<EnvironmentParams>,
    pub radio: RadioParams,
    pub task: TaskSpec,
    pub geometry: GeometryParams,
    pub compute: ComputeModel,
    pub quadrature_rel_tol: f64,
    pub solver: RadiusSolver,
}

impl Default for AnalysisParams {
    fn default() -> Self {
        Self {
            env: EnvironmentParams::urban(),
            downlink_env: None,
            radio: RadioParams::default(),
            task: TaskSpec::default(),
            geometry: GeometryParams::default(),
            compute: ComputeModel::default(),
            quadrature_rel_tol: 1e-6,
            solver: RadiusSolver::default(),
        }
    }
}

impl AnalysisParams {
    pub fn validate(&self) -> Result<()> {
        self.env.validate()?;
        if let Some(env) = &self.downlink_env {
            env.validate()?;
        }
        self.radio.validate()?;
        self.task.validate()?;
        self.geometry.validate()?;
        self.compute.validate()?;
        ensure(
            self.quadrature_rel_tol > 0.0 && self.quadrature_rel_tol <= 1e-2,
            "quadrature_rel_tol",
            "must lie in (0, 1e-2]",
        )?;
        ensure(
            self.solver.tol >= 0.0 && self.solver.max_iter >= 1,
            "solver",
            "needs tol >= 0 and max_iter >= 1",
        )
    }

    pub fn uplink(&self) -> Link<'_> {
        Link {
            tx_power: self.radio.gu_tx_power,
            pathloss_exp: self.env.pathloss_up,
            env: &self.env,
            radio: &self.radio,
            altitude: self.geometry.altitude,
            data_size: self.task.data_size,
        }
    }

    pub fn downlink(&self) -> Link<'_> {
        Link {
            tx_power: self.radio.uav_tx_power,
            pathloss_exp: self.env.pathloss_down,
            env: self.downlink_env.as_ref().unwrap_or(&self.env),
            radio: &self.radio,
            altitude: self.geometry.altitude,
            data_size: self.task.data_size,
        }
    }

    /// Copy with the UAV moved to `altitude` and transmitting at `uav_tx_power` W.
    pub fn at_operating_point(&self, altitude: f64, uav_tx_power: f64) -> Self {
        let mut p = self.clone();
        p.geometry.altitude = altitude;
        p.radio.uav_tx_power = uav_tx_power;
        p
    }

    pub fn quadrature_options(&self) -> QuadratureOptions {
        QuadratureOptions::with_rel_tol(self.quadrature_rel_tol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateMethod {
    Analytic,
    MonteCarlo,
}

/// A probability together with where it came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuccessEstimate {
    pub value: f64,
    pub method: EstimateMethod,
    /// Half-width of the confidence interval; 0 for analytic values.
    pub ci_halfwidth: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Number of Bernoulli samples; 0 for analytic values.
    pub trials: u64,
}

impl SuccessEstimate {
    pub fn analytic(value: f64) -> Self {
        Self {
            value,
            method: EstimateMethod::Analytic,
            ci_halfwidth: 0.0,
            ci_low: value,
            ci_high: value,
            trials: 0,
        }
    }

    pub fn contains(&self, p: f64) -> bool {
        p >= self.ci_low && p <= self.ci_high
    }
}

/// Density of CNs at distance `r_c` that can complete the task of a GU at
/// distance `r_u`.
pub fn effective_density(r_u: f64, r_c: f64, params: &AnalysisParams) -> Result<f64> {
    let lambda = params.geometry.cn_density;
    if lambda == 0.0 {
        return Ok(0.0);
    }
    let t1 = uplink_latency(r_u, params);
    let residual = params.task.max_latency - t1;
    let r_max = radius_for_budget(residual, params)?;
    if r_c > r_max {
        return Ok(0.0);
    }
    let t2 = params.downlink().latency(r_c);
    Ok(lambda
        * params
            .compute
            .latency_cdf(residual - t2, params.task.data_size))
}

/// Expected number of qualified CNs for a GU at distance `r_u`.
pub fn qualified_intensity(r_u: f64, params: &AnalysisParams) -> Result<f64> {
    let lambda = params.geometry.cn_density;
    if lambda == 0.0 {
        return Ok(0.0);
    }
    let residual = params.task.max_latency - uplink_latency(r_u, params);
    let r_max = radius_for_budget(residual, params)?;
    if r_max == 0.0 {
        return Ok(0.0);
    }
    if r_max == f64::INFINITY {
        return Ok(f64::INFINITY);
    }

    let data = params.task.data_size;
    let mut breaks = Vec::new();
    for tau in params.compute.breakpoints(data) {
        let r = radius_for_budget(residual - tau, params)?;
        if r > 0.0 && r < r_max {
            breaks.push(r);
        }
    }

    let downlink = params.downlink();
    let compute = &params.compute;
    let integral = integrate(
        |r_c| Ok(compute.latency_cdf(residual - downlink.latency(r_c), data) * r_c),
        0.0,
        r_max,
        &breaks,
        &params.quadrature_options(),
    )?;
    Ok(2.0 * PI * lambda * integral.value.max(0.0))
}

/// Probability that at least one CN can complete the task of a GU at `r_u`.
pub fn success_probability(r_u: f64, params: &AnalysisParams) -> Result<f64> {
    ensure(
        r_u >= 0.0 && r_u <= params.geometry.request_radius,
        "r_u",
        "must lie in [0, request_radius]",
    )?;
    let lambda_q = qualified_intensity(r_u, params)?;
    Ok(-(-lambda_q).exp_m1())
}

/// Success probability averaged over GUs uniform in the request zone.
pub fn average_success_probability(params: &AnalysisParams) -> Result<f64> {
    let radius = params.geometry.request_radius;
    ensure(radius > 0.0, "geometry.request_radius", "must be > 0")?;
    if params.geometry.cn_density == 0.0 {
        return Ok(0.0);
    }
    // The integral is scaled by 2 / R^2, so absolute accuracy is set in
    // probability units.
    let mut opts = params.quadrature_options();
    opts.abs_tol = 1e-10 * 0.5 * radius * radius;
    let q = integrate(
        |r_u| Ok(success_probability(r_u, params)? * r_u),
        0.0,
        radius,
        &[],
        &opts,
    )?;
    Ok((2.0 * q.value / (radius * radius)).clamp(0.0, 1.0))
}

/// [`average_success_probability`] wrapped as an analytic estimate.
pub fn average_success_estimate(params: &AnalysisParams) -> Result<SuccessEstimate> {
    average_success_probability(params).map(SuccessEstimate::analytic)
}

/// Largest communication radius over the request zone (attained by the GU
/// directly below the UAV).
pub fn communication_reach(params: &AnalysisParams) -> Result<f64> {
    crate::channel::max_service_radius(0.0, params)
}
