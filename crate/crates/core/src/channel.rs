//! Probabilistic LoS/NLoS air-ground channel, Shannon link rates and the
//! latency-constrained service radius.
//!
//! The analytic chain works with the *mean* received power, i.e. the
//! expectation of the two-branch LoS/NLoS model over the LoS Bernoulli
//! variable. [`conditional_received_power`] exposes the two branches
//! separately for the Bernoulli simulation mode.

use serde::{Deserialize, Serialize};

use crate::analysis::AnalysisParams;
use crate::error::{ensure, invalid, Error, Result};
use crate::units;

/// Environment constants of the LoS probability curve and the path loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentParams {
    /// Slope `B` of the logistic LoS curve.
    pub b_slope: f64,
    /// Offset `C` of the logistic LoS curve, in degrees.
    pub c_offset: f64,
    /// Extra NLoS attenuation as a linear power factor in (0, 1].
    pub nlos_attenuation: f64,
    /// Uplink (GU to UAV) path loss exponent.
    pub pathloss_up: f64,
    /// Downlink (UAV to CN) path loss exponent.
    pub pathloss_down: f64,
}

impl EnvironmentParams {
    /// Dense urban environment with 20 dB NLoS attenuation and free-space
    /// exponents on both hops.
    pub fn urban() -> Self {
        Self {
            b_slope: 0.136,
            c_offset: 11.95,
            nlos_attenuation: units::db_to_linear(-20.0),
            pathloss_up: 2.0,
            pathloss_down: 2.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure(
            self.b_slope.is_finite() && self.b_slope > 0.0,
            "env.b_slope",
            "must be finite and > 0",
        )?;
        ensure(
            self.c_offset.is_finite() && self.c_offset > 0.0,
            "env.c_offset",
            "must be finite and > 0",
        )?;
        ensure(
            self.nlos_attenuation > 0.0 && self.nlos_attenuation <= 1.0,
            "env.nlos_attenuation",
            "must lie in (0, 1]",
        )?;
        ensure(
            self.pathloss_up.is_finite() && self.pathloss_up >= 2.0,
            "env.pathloss_up",
            "must be >= 2",
        )?;
        ensure(
            self.pathloss_down.is_finite() && self.pathloss_down >= 2.0,
            "env.pathloss_down",
            "must be >= 2",
        )
    }
}

impl Default for EnvironmentParams {
    fn default() -> Self {
        Self::urban()
    }
}

/// Transmit powers, bandwidth and noise floor (all SI units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadioParams {
    /// GU transmit power, W.
    pub gu_tx_power: f64,
    /// UAV transmit power, W.
    pub uav_tx_power: f64,
    /// Channel bandwidth, Hz.
    pub bandwidth: f64,
    /// Noise power, W.
    pub noise_power: f64,
}

impl Default for RadioParams {
    fn default() -> Self {
        Self {
            gu_tx_power: units::dbw_to_watts(20.0),
            uav_tx_power: units::dbw_to_watts(20.0),
            bandwidth: 8e6,
            noise_power: units::dbm_to_watts(-120.0),
        }
    }
}

impl RadioParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("radio.gu_tx_power", self.gu_tx_power),
            ("radio.uav_tx_power", self.uav_tx_power),
            ("radio.bandwidth", self.bandwidth),
            ("radio.noise_power", self.noise_power),
        ] {
            ensure(v.is_finite() && v > 0.0, name, "must be finite and > 0")?;
        }
        Ok(())
    }
}

/// Offloaded task: payload and end-to-end deadline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    /// Payload, bits.
    pub data_size: f64,
    /// End-to-end latency budget, s.
    pub max_latency: f64,
}

impl Default for TaskSpec {
    fn default() -> Self {
        Self {
            data_size: units::MEBIBYTE_BITS,
            max_latency: 55e-3,
        }
    }
}

impl TaskSpec {
    pub fn validate(&self) -> Result<()> {
        // A zero payload is allowed: it is the degenerate "no transmission" case.
        ensure(
            self.data_size.is_finite() && self.data_size >= 0.0,
            "task.data_size",
            "must be finite and >= 0",
        )?;
        ensure(
            self.max_latency > 0.0 && !self.max_latency.is_nan(),
            "task.max_latency",
            "must be > 0",
        )
    }
}

/// Deployment geometry and node densities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryParams {
    /// UAV altitude `h`, m.
    pub altitude: f64,
    /// Request-zone radius `R_u`, m.
    pub request_radius: f64,
    /// Radius of the CN sampling window `R_d`, m. Seeds the radius bracket
    /// and the default Monte Carlo window.
    pub service_window_radius: f64,
    /// CN density, nodes per m².
    pub cn_density: f64,
    /// GU density, nodes per m². Sets the number of tasks served per hover.
    pub gu_density: f64,
    /// Optional hard cap on the service radius (CN distribution radius), m.
    pub service_cap: Option<f64>,
}

impl Default for GeometryParams {
    fn default() -> Self {
        Self {
            altitude: 200.0,
            request_radius: 200.0,
            service_window_radius: 1000.0,
            cn_density: units::per_km2(5.0),
            gu_density: units::per_km2(500.0),
            service_cap: None,
        }
    }
}

impl GeometryParams {
    pub fn validate(&self) -> Result<()> {
        ensure(
            self.altitude.is_finite() && self.altitude > 0.0,
            "geometry.altitude",
            "must be finite and > 0",
        )?;
        ensure(
            self.request_radius.is_finite() && self.request_radius > 0.0,
            "geometry.request_radius",
            "must be finite and > 0",
        )?;
        ensure(
            self.service_window_radius.is_finite()
                && self.service_window_radius >= self.request_radius,
            "geometry.service_window_radius",
            "must be finite and >= request_radius",
        )?;
        ensure(
            self.cn_density.is_finite() && self.cn_density >= 0.0,
            "geometry.cn_density",
            "must be finite and >= 0",
        )?;
        ensure(
            self.gu_density.is_finite() && self.gu_density >= 0.0,
            "geometry.gu_density",
            "must be finite and >= 0",
        )?;
        if let Some(cap) = self.service_cap {
            ensure(cap > 0.0, "geometry.service_cap", "must be > 0")?;
        }
        Ok(())
    }

    /// Expected number of GUs in the request zone.
    pub fn expected_gu_count(&self) -> f64 {
        self.gu_density * std::f64::consts::PI * self.request_radius * self.request_radius
    }
}

/// Bisection settings for the service-radius solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusSolver {
    /// Largest latency residual, s, accepted when `max_iter` runs out
    /// before the bracket collapses.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for RadiusSolver {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 200,
        }
    }
}

/// Probability that a link with the given geometry is LoS.
///
/// The elevation angle enters the logistic curve in degrees.
pub fn los_probability(
    altitude: f64,
    horizontal_dist: f64,
    env: &EnvironmentParams,
) -> Result<f64> {
    if !altitude.is_finite() || !horizontal_dist.is_finite() {
        return Err(invalid("los_probability", "inputs must be finite"));
    }
    ensure(altitude > 0.0, "altitude", "must be > 0")?;
    ensure(horizontal_dist >= 0.0, "horizontal_dist", "must be >= 0")?;
    Ok(los_prob(altitude, horizontal_dist, env))
}

#[inline]
pub(crate) fn los_prob(altitude: f64, horizontal_dist: f64, env: &EnvironmentParams) -> f64 {
    let elevation_deg = altitude.atan2(horizontal_dist).to_degrees();
    1.0 / (1.0 + env.c_offset * (-env.b_slope * (elevation_deg - env.c_offset)).exp())
}

#[inline]
fn pathloss_gain(horizontal_dist: f64, altitude: f64, exponent: f64) -> f64 {
    let d2 = horizontal_dist * horizontal_dist + altitude * altitude;
    if exponent == 2.0 {
        1.0 / d2
    } else {
        d2.powf(-exponent / 2.0)
    }
}

/// Received power averaged over the LoS/NLoS state.
pub fn mean_received_power(
    tx_power: f64,
    horizontal_dist: f64,
    altitude: f64,
    pathloss_exp: f64,
    env: &EnvironmentParams,
) -> f64 {
    let p_los = los_prob(altitude, horizontal_dist, env);
    let factor = p_los + (1.0 - p_los) * env.nlos_attenuation;
    factor * tx_power * pathloss_gain(horizontal_dist, altitude, pathloss_exp)
}

/// Received power for a realized LoS (`is_los = true`) or NLoS link.
pub fn conditional_received_power(
    tx_power: f64,
    horizontal_dist: f64,
    altitude: f64,
    pathloss_exp: f64,
    env: &EnvironmentParams,
    is_los: bool,
) -> f64 {
    let los = tx_power * pathloss_gain(horizontal_dist, altitude, pathloss_exp);
    if is_los {
        los
    } else {
        env.nlos_attenuation * los
    }
}

/// Shannon rate `W log2(1 + P_r / N_0)` in bit/s.
pub fn link_rate(received_power: f64, radio: &RadioParams) -> f64 {
    radio.bandwidth * (received_power / radio.noise_power).ln_1p() / std::f64::consts::LN_2
}

/// Time to push `data_size` bits at `rate`. A zero rate yields `+inf`.
#[inline]
pub fn transmission_latency(data_size: f64, rate: f64) -> f64 {
    if data_size == 0.0 {
        0.0
    } else if rate > 0.0 {
        data_size / rate
    } else {
        f64::INFINITY
    }
}

/// One hop of the relay: its transmitter power, exponent and environment.
#[derive(Debug, Clone, Copy)]
pub struct Link<'a> {
    pub tx_power: f64,
    pub pathloss_exp: f64,
    pub env: &'a EnvironmentParams,
    pub radio: &'a RadioParams,
    pub altitude: f64,
    pub data_size: f64,
}

impl Link<'_> {
    #[inline]
    pub fn mean_power(&self, horizontal_dist: f64) -> f64 {
        mean_received_power(
            self.tx_power,
            horizontal_dist,
            self.altitude,
            self.pathloss_exp,
            self.env,
        )
    }

    #[inline]
    pub fn latency(&self, horizontal_dist: f64) -> f64 {
        transmission_latency(
            self.data_size,
            link_rate(self.mean_power(horizontal_dist), self.radio),
        )
    }

    #[inline]
    pub fn realized_latency(&self, horizontal_dist: f64, is_los: bool) -> f64 {
        let p = conditional_received_power(
            self.tx_power,
            horizontal_dist,
            self.altitude,
            self.pathloss_exp,
            self.env,
            is_los,
        );
        transmission_latency(self.data_size, link_rate(p, self.radio))
    }

    #[inline]
    pub fn los_probability(&self, horizontal_dist: f64) -> f64 {
        los_prob(self.altitude, horizontal_dist, self.env)
    }
}

/// GU-to-UAV latency `t_1` for a GU at horizontal distance `r_u`.
pub fn uplink_latency(r_u: f64, params: &AnalysisParams) -> f64 {
    params.uplink().latency(r_u)
}

/// UAV-to-CN latency `t_2` for a CN at horizontal distance `r_c`.
pub fn downlink_latency(r_c: f64, params: &AnalysisParams) -> f64 {
    params.downlink().latency(r_c)
}

/// Largest CN distance whose forwarding latency fits in what is left of the
/// deadline after the uplink hop. Zero when the uplink alone exhausts it.
pub fn max_service_radius(r_u: f64, params: &AnalysisParams) -> Result<f64> {
    let residual = params.task.max_latency - uplink_latency(r_u, params);
    radius_for_budget(residual, params)
}

/// Solve `t_2(r) = budget` for `r` by bisection; `t_2` is continuous and
/// strictly increasing in `r`. The result honours `geometry.service_cap`.
pub fn radius_for_budget(budget: f64, params: &AnalysisParams) -> Result<f64> {
    let cap = params.geometry.service_cap.unwrap_or(f64::INFINITY);
    if budget.is_nan() || budget <= 0.0 {
        return Ok(0.0);
    }
    let link = params.downlink();
    let at_origin = link.latency(0.0);
    if at_origin >= budget {
        return Ok(0.0);
    }
    if budget == f64::INFINITY {
        return Ok(cap);
    }
    if cap.is_finite() && link.latency(cap) <= budget {
        return Ok(cap);
    }

    let solver = params.solver;
    let mut lo = 0.0;
    let mut hi = params.geometry.service_window_radius.max(1.0);
    let mut expansions = 0;
    while link.latency(hi) < budget {
        lo = hi;
        hi *= 2.0;
        expansions += 1;
        if expansions > 64 || !hi.is_finite() {
            return Err(Error::Bisection {
                lo,
                hi,
                residual: link.latency(lo) - budget,
                iterations: 0,
            });
        }
    }

    // Bisect to floating-point exhaustion so the radius is a smooth function
    // of the budget; `tol` only decides whether an unfinished run is usable.
    let mut mid = 0.5 * (lo + hi);
    let mut residual = f64::INFINITY;
    for _ in 0..solver.max_iter {
        mid = 0.5 * (lo + hi);
        residual = link.latency(mid) - budget;
        if residual == 0.0 || !(mid > lo && mid < hi) {
            return Ok(mid.min(cap));
        }
        if residual < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if residual.abs() <= solver.tol {
        return Ok(mid.min(cap));
    }
    Err(Error::Bisection {
        lo,
        hi,
        residual,
        iterations: solver.max_iter,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn urban() -> EnvironmentParams {
        EnvironmentParams::urban()
    }

    // Independent scalar evaluation of the logistic LoS curve.
    fn los_oracle(h: f64, r: f64, b: f64, c: f64) -> f64 {
        let theta = if r == 0.0 {
            90.0
        } else {
            (h / r).atan() * 180.0 / std::f64::consts::PI
        };
        1.0 / (1.0 + c * (-b * (theta - c)).exp())
    }

    #[test]
    fn los_overhead_value() {
        let p = los_probability(200.0, 0.0, &urban()).unwrap();
        let expected = 1.0 / (1.0 + 11.95 * (-0.136f64 * (90.0 - 11.95)).exp());
        assert!((p - expected).abs() < 1e-15);
        assert!((p - 0.99971).abs() < 1e-5);
    }

    #[test]
    fn los_at_45_degrees() {
        let p = los_probability(200.0, 200.0, &urban()).unwrap();
        assert!((p - los_oracle(200.0, 200.0, 0.136, 11.95)).abs() < 1e-14);
        assert!((p - 0.882_266_308).abs() < 1e-8);
    }

    #[test]
    fn los_far_field_floor() {
        let env = urban();
        let floor = 1.0 / (1.0 + env.c_offset * (env.b_slope * env.c_offset).exp());
        let p = los_probability(100.0, 1e12, &env).unwrap();
        assert!((p - floor).abs() < 1e-9);
    }

    #[test]
    fn los_rejects_non_finite() {
        assert!(los_probability(f64::NAN, 1.0, &urban()).is_err());
        assert!(los_probability(100.0, f64::INFINITY, &urban()).is_err());
        assert!(los_probability(0.0, 1.0, &urban()).is_err());
    }

    #[test]
    fn no_attenuation_means_pure_los_power() {
        let env = EnvironmentParams {
            nlos_attenuation: 1.0,
            ..urban()
        };
        for &(r, h) in &[(0.0, 50.0), (120.0, 300.0), (900.0, 80.0)] {
            let p = mean_received_power(3.0, r, h, 2.0, &env);
            let los = 3.0 / (r * r + h * h);
            assert!((p - los).abs() <= 1e-15 * los);
            let nlos = conditional_received_power(3.0, r, h, 2.0, &env, false);
            assert_eq!(nlos, conditional_received_power(3.0, r, h, 2.0, &env, true));
        }
    }

    #[test]
    fn nlos_branch_is_attenuated() {
        let env = urban();
        let los = conditional_received_power(100.0, 200.0, 200.0, 2.0, &env, true);
        let nlos = conditional_received_power(100.0, 200.0, 200.0, 2.0, &env, false);
        assert!((los - 100.0 / 80_000.0).abs() < 1e-18);
        assert!((nlos / los - 0.01).abs() < 1e-15);
    }

    #[test]
    fn mean_power_scalar_oracle() {
        // P_u = 100 W, r = h = 200 m, alpha = 2, eta = 0.01.
        let p_los = los_oracle(200.0, 200.0, 0.136, 11.95);
        let expected = (p_los + (1.0 - p_los) * 0.01) * 100.0 / 80_000.0;
        let got = mean_received_power(100.0, 200.0, 200.0, 2.0, &urban());
        assert!((got - expected).abs() <= 1e-15 * expected);
        assert!((got - 1.104_304_556e-3).abs() < 1e-12);
    }

    #[test]
    fn rate_edge_cases() {
        let radio = RadioParams::default();
        assert_eq!(link_rate(0.0, &radio), 0.0);
        assert!((link_rate(radio.noise_power, &radio) - radio.bandwidth).abs() < 1e-6);
        let pr = mean_received_power(100.0, 200.0, 200.0, 2.0, &urban());
        let expected = 8e6 * (1.0 + pr / 1e-15).log2();
        assert!((link_rate(pr, &radio) - expected).abs() <= 1e-9 * expected);
    }

    #[test]
    fn zero_rate_is_infinite_latency() {
        assert_eq!(transmission_latency(1.0, 0.0), f64::INFINITY);
        assert_eq!(transmission_latency(0.0, 0.0), 0.0);
    }

    #[test]
    fn uplink_latency_scalar_oracle() {
        let params = AnalysisParams::default();
        let pr = mean_received_power(100.0, 200.0, 200.0, 2.0, &urban());
        let expected = params.task.data_size / (8e6 * (1.0 + pr / 1e-15).log2());
        let t1 = uplink_latency(200.0, &params);
        assert!((t1 - expected).abs() < 1e-15);
        // 1 MiB payload: about 26 ms, inside the 55 ms deadline.
        assert!((t1 - 0.026_210_288).abs() < 1e-8, "{t1}");
    }

    #[test]
    fn zero_payload_has_zero_latency() {
        let mut params = AnalysisParams::default();
        params.task.data_size = 0.0;
        assert_eq!(uplink_latency(150.0, &params), 0.0);
        assert_eq!(downlink_latency(150.0, &params), 0.0);
    }

    #[test]
    fn downlink_latency_increases_with_distance() {
        let params = AnalysisParams::default();
        let mut last = downlink_latency(0.0, &params);
        for i in 1..200 {
            let t = downlink_latency(i as f64 * 10.0, &params);
            assert!(t > last);
            last = t;
        }
    }

    #[test]
    fn comm_limited_collapse() {
        let mut params = AnalysisParams::default();
        params.task.max_latency = 0.9 * uplink_latency(100.0, &params);
        assert_eq!(max_service_radius(100.0, &params).unwrap(), 0.0);
    }

    #[test]
    fn infinite_deadline_hits_cap() {
        let mut params = AnalysisParams::default();
        params.task.max_latency = f64::INFINITY;
        assert_eq!(max_service_radius(100.0, &params).unwrap(), f64::INFINITY);
        params.geometry.service_cap = Some(1000.0);
        assert_eq!(max_service_radius(100.0, &params).unwrap(), 1000.0);
    }

    #[test]
    fn service_radius_matches_grid_scan() {
        let mut params = AnalysisParams::default();
        params.geometry.altitude = 200.0;
        let r = max_service_radius(100.0, &params).unwrap();
        let budget = params.task.max_latency - uplink_latency(100.0, &params);
        assert!((downlink_latency(r, &params) - budget).abs() <= 1e-9);

        // Dense 0.1 m scan for the last admissible grid point.
        let mut last_ok = 0.0;
        let mut k = 0u64;
        loop {
            let rc = k as f64 * 0.1;
            if downlink_latency(rc, &params) > budget {
                break;
            }
            last_ok = rc;
            k += 1;
        }
        assert!(
            r >= last_ok && r < last_ok + 0.1,
            "r = {r}, scan = {last_ok}"
        );
    }

    #[test]
    fn bisection_failure_is_reported() {
        let mut params = AnalysisParams::default();
        params.solver = RadiusSolver {
            tol: 0.0,
            max_iter: 3,
        };
        match max_service_radius(50.0, &params) {
            Err(Error::Bisection { iterations, .. }) => assert_eq!(iterations, 3),
            other => panic!("expected bisection error, got {other:?}"),
        }
    }
}
