//! Monte Carlo oracle for the task completion probability.
//!
//! Every sample draws a fresh CN field and a fresh GU position from its own
//! ChaCha stream (`stream = sample index`), so estimates are bit-identical
//! for a given seed regardless of how rayon schedules the work.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{communication_reach, AnalysisParams, EstimateMethod, SuccessEstimate};
use crate::error::{ensure, Result};

/// Two-sided 99 % standard normal quantile.
pub const Z_99: f64 = 2.575_829_303_548_900_4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ChannelMode {
    /// Links use the LoS-averaged received power, exactly as the analysis does.
    #[default]
    MeanPower,
    /// Each link realizes LoS or NLoS once per task.
    Bernoulli,
}

impl std::str::FromStr for ChannelMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "mean_power" | "mean-power" => Ok(Self::MeanPower),
            "bernoulli" => Ok(Self::Bernoulli),
            other => Err(format!(
                "unknown channel mode `{other}` (mean_power|bernoulli)"
            )),
        }
    }
}

impl std::fmt::Display for ChannelMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::MeanPower => "mean_power",
            Self::Bernoulli => "bernoulli",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub trials: u64,
    /// GU draws per trial; the estimate uses `trials * gu_samples` samples.
    pub gu_samples: u64,
    pub seed: u64,
    pub channel_mode: ChannelMode,
    /// CN sampling window, m. `None` picks [`default_window_radius`].
    pub window_radius: Option<f64>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            trials: 100_000,
            gu_samples: 1,
            seed: 0x5eed,
            channel_mode: ChannelMode::MeanPower,
            window_radius: None,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        ensure(self.trials >= 1, "sim.trials", "must be >= 1")?;
        ensure(self.gu_samples >= 1, "sim.gu_samples", "must be >= 1")?;
        if let Some(w) = self.window_radius {
            ensure(
                w.is_finite() && w > 0.0,
                "sim.window_radius",
                "must be finite and > 0",
            )?;
        }
        Ok(())
    }

    pub fn total_samples(&self) -> u64 {
        self.trials.saturating_mul(self.gu_samples)
    }
}

/// Independent generator for sample `index` of a run seeded with `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Inverse CDF of the radial GU density `2r / R^2`.
pub fn gu_radius_from_uniform(u: f64, request_radius: f64) -> f64 {
    request_radius * u.sqrt()
}

pub fn sample_gu_radius<R: Rng + ?Sized>(rng: &mut R, request_radius: f64) -> f64 {
    gu_radius_from_uniform(rng.random::<f64>(), request_radius)
}

/// Radial coordinates of a PPP of the given density restricted to a disk.
pub fn sample_cn_field<R: Rng + ?Sized>(rng: &mut R, density: f64, window_radius: f64) -> Vec<f64> {
    let mean = density * std::f64::consts::PI * window_radius * window_radius;
    if !(mean > 0.0) {
        return Vec::new();
    }
    let count: f64 = Poisson::new(mean)
        .expect("positive finite mean")
        .sample(rng);
    (0..count as usize)
        .map(|_| window_radius * rng.random::<f64>().sqrt())
        .collect()
}

/// Whether any CN in `cn_radii` meets `t_1 + t_2 + t_c <= T_max`.
pub fn simulate_task<R: Rng + ?Sized>(
    rng: &mut R,
    r_u: f64,
    cn_radii: &[f64],
    params: &AnalysisParams,
    mode: ChannelMode,
) -> bool {
    let uplink = params.uplink();
    let downlink = params.downlink();
    let deadline = params.task.max_latency;
    let data = params.task.data_size;

    let t1 = match mode {
        ChannelMode::MeanPower => uplink.latency(r_u),
        ChannelMode::Bernoulli => {
            let los = rng.random::<f64>() < uplink.los_probability(r_u);
            uplink.realized_latency(r_u, los)
        }
    };
    if !(t1 <= deadline) {
        return false;
    }

    let mut success = false;
    for &r_c in cn_radii {
        // Draws happen for every CN so the stream layout does not depend on
        // where the first success falls.
        let t2 = match mode {
            ChannelMode::MeanPower => downlink.latency(r_c),
            ChannelMode::Bernoulli => {
                let los = rng.random::<f64>() < downlink.los_probability(r_c);
                downlink.realized_latency(r_c, los)
            }
        };
        let tc = params.compute.sample(rng, data);
        if t1 + t2 + tc <= deadline {
            success = true;
        }
    }
    success
}

/// Window large enough to hold every CN that could ever qualify.
///
/// With a service cap the CN population lives inside the cap. Otherwise the
/// window is `max(R_d, 1.2 * reach)`, where the reach uses pure-LoS links in
/// Bernoulli mode because a realized LoS link outranges the mean power.
pub fn default_window_radius(params: &AnalysisParams, mode: ChannelMode) -> Result<f64> {
    if let Some(cap) = params.geometry.service_cap {
        return Ok(cap);
    }
    let reach = match mode {
        ChannelMode::MeanPower => communication_reach(params)?,
        ChannelMode::Bernoulli => {
            let mut los_only = params.clone();
            los_only.env.nlos_attenuation = 1.0;
            if let Some(env) = los_only.downlink_env.as_mut() {
                env.nlos_attenuation = 1.0;
            }
            communication_reach(&los_only)?
        }
    };
    Ok(params.geometry.service_window_radius.max(1.2 * reach))
}

fn resolve_window(cfg: &SimConfig, params: &AnalysisParams) -> Result<f64> {
    match cfg.window_radius {
        Some(w) => {
            let needed = match params.geometry.service_cap {
                Some(cap) => cap,
                None => communication_reach(params)?,
            };
            if w < needed {
                log::warn!(
                    "Monte Carlo window {w:.1} m is smaller than the service radius {needed:.1} m; \
                     the estimate is biased low"
                );
            }
            Ok(w)
        }
        None => default_window_radius(params, cfg.channel_mode),
    }
}

/// Wilson score interval for `successes` out of `n` at quantile `z`.
pub fn wilson_interval(successes: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    // Rounding can push a bound past the point estimate at p = 0 or p = 1.
    ((centre - half).clamp(0.0, p), (centre + half).clamp(p, 1.0))
}

fn estimate_from_counts(successes: u64, n: u64) -> SuccessEstimate {
    let (lo, hi) = wilson_interval(successes, n, Z_99);
    SuccessEstimate {
        value: successes as f64 / n as f64,
        method: EstimateMethod::MonteCarlo,
        ci_halfwidth: 0.5 * (hi - lo),
        ci_low: lo,
        ci_high: hi,
        trials: n,
    }
}

fn run<F>(cfg: &SimConfig, params: &AnalysisParams, gu_radius: F) -> Result<SuccessEstimate>
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    cfg.validate()?;
    params.validate()?;
    let n = cfg.total_samples();
    if params.geometry.cn_density == 0.0 {
        return Ok(estimate_from_counts(0, n));
    }
    let window = resolve_window(cfg, params)?;
    let successes: u64 = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(cfg.seed, i);
            let field = sample_cn_field(&mut rng, params.geometry.cn_density, window);
            let r_u = gu_radius(&mut rng);
            simulate_task(&mut rng, r_u, &field, params, cfg.channel_mode) as u64
        })
        .sum();
    Ok(estimate_from_counts(successes, n))
}

/// Spatially averaged success probability with a 99 % Wilson interval.
pub fn estimate_average_success(
    cfg: &SimConfig,
    params: &AnalysisParams,
) -> Result<SuccessEstimate> {
    let radius = params.geometry.request_radius;
    run(cfg, params, |rng| sample_gu_radius(rng, radius))
}

/// Success probability for a GU pinned at distance `r_u`.
pub fn estimate_success_at(
    cfg: &SimConfig,
    r_u: f64,
    params: &AnalysisParams,
) -> Result<SuccessEstimate> {
    run(cfg, params, |_| r_u)
}
