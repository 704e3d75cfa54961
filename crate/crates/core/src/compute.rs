//! Computing-latency distribution of a CN, `F(t; D) = P(t_c <= t)`.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::units;

/// Distribution family of the CN computing latency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ComputeDistribution {
    /// Every CN takes exactly `latency` seconds.
    Deterministic {
        latency: f64,
    },
    Exponential {
        mean: f64,
    },
    /// `shift` plus an exponential with mean `mean`.
    ShiftedExponential {
        shift: f64,
        mean: f64,
    },
    /// Empirical CDF of the samples (sorted ascending, non-empty).
    Empirical {
        samples: Arc<[f64]>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComputeModel {
    pub distribution: ComputeDistribution,
    /// When set, time parameters scale linearly with `D / reference_data_size`.
    pub workload_scaling: bool,
    /// Workload at which the time parameters are quoted, bits.
    pub reference_data_size: f64,
}

impl Default for ComputeModel {
    fn default() -> Self {
        Self::deterministic(2e-3)
    }
}

impl ComputeModel {
    pub fn deterministic(latency: f64) -> Self {
        Self::new(ComputeDistribution::Deterministic { latency })
    }

    pub fn exponential(mean: f64) -> Self {
        Self::new(ComputeDistribution::Exponential { mean })
    }

    pub fn shifted_exponential(shift: f64, mean: f64) -> Self {
        Self::new(ComputeDistribution::ShiftedExponential { shift, mean })
    }

    /// Builds an empirical model; the samples are sorted here.
    pub fn empirical(mut samples: Vec<f64>) -> Self {
        samples.sort_by(f64::total_cmp);
        Self::new(ComputeDistribution::Empirical {
            samples: samples.into(),
        })
    }

    fn new(distribution: ComputeDistribution) -> Self {
        Self {
            distribution,
            workload_scaling: false,
            reference_data_size: units::MEBIBYTE_BITS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        match &self.distribution {
            ComputeDistribution::Deterministic { latency } => {
                ensure(ok(*latency), "compute.latency", "must be finite and >= 0")?
            }
            ComputeDistribution::Exponential { mean } => {
                ensure(ok(*mean), "compute.mean", "must be finite and >= 0")?
            }
            ComputeDistribution::ShiftedExponential { shift, mean } => {
                ensure(ok(*shift), "compute.shift", "must be finite and >= 0")?;
                ensure(ok(*mean), "compute.mean", "must be finite and >= 0")?;
            }
            ComputeDistribution::Empirical { samples } => {
                ensure(!samples.is_empty(), "compute.samples", "must be non-empty")?;
                ensure(
                    samples.iter().all(|&s| ok(s)),
                    "compute.samples",
                    "must be finite and >= 0",
                )?;
                ensure(
                    samples.windows(2).all(|w| w[0] <= w[1]),
                    "compute.samples",
                    "must be sorted ascending",
                )?;
            }
        }
        if self.workload_scaling {
            ensure(
                self.reference_data_size > 0.0,
                "compute.reference_data_size",
                "must be > 0 when workload scaling is on",
            )?;
        }
        Ok(())
    }

    fn scale(&self, data_size: f64) -> f64 {
        if self.workload_scaling {
            data_size / self.reference_data_size
        } else {
            1.0
        }
    }

    /// `P(t_c <= t)` for a task of `data_size` bits. Right-continuous, so a
    /// budget exactly equal to a deterministic latency counts as success.
    pub fn latency_cdf(&self, t: f64, data_size: f64) -> f64 {
        if t.is_nan() || t < 0.0 {
            return 0.0;
        }
        if t == f64::INFINITY {
            return 1.0;
        }
        let s = self.scale(data_size);
        match &self.distribution {
            ComputeDistribution::Deterministic { latency } => {
                if t >= latency * s {
                    1.0
                } else {
                    0.0
                }
            }
            ComputeDistribution::Exponential { mean } => exp_cdf(t, mean * s),
            ComputeDistribution::ShiftedExponential { shift, mean } => {
                let shift = shift * s;
                if t < shift {
                    0.0
                } else {
                    exp_cdf(t - shift, mean * s)
                }
            }
            ComputeDistribution::Empirical { samples } => {
                let below = if s == 1.0 {
                    samples.partition_point(|&x| x <= t)
                } else {
                    samples.partition_point(|&x| x * s <= t)
                };
                below as f64 / samples.len() as f64
            }
        }
    }

    /// Draw one computing latency.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, data_size: f64) -> f64 {
        let s = self.scale(data_size);
        match &self.distribution {
            ComputeDistribution::Deterministic { latency } => latency * s,
            ComputeDistribution::Exponential { mean } => exp_sample(rng, mean * s),
            ComputeDistribution::ShiftedExponential { shift, mean } => {
                shift * s + exp_sample(rng, mean * s)
            }
            ComputeDistribution::Empirical { samples } => {
                samples[rng.random_range(0..samples.len())] * s
            }
        }
    }

    /// Latencies at which the CDF jumps or has a kink.
    pub fn breakpoints(&self, data_size: f64) -> Vec<f64> {
        let s = self.scale(data_size);
        match &self.distribution {
            ComputeDistribution::Deterministic { latency } => vec![latency * s],
            ComputeDistribution::Exponential { .. } => vec![0.0],
            ComputeDistribution::ShiftedExponential { shift, .. } => vec![shift * s],
            ComputeDistribution::Empirical { samples } => {
                let mut out: Vec<f64> = samples.iter().map(|x| x * s).collect();
                out.dedup();
                out
            }
        }
    }

    /// The deterministic latency, if the model is a unit step.
    pub fn deterministic_latency(&self, data_size: f64) -> Option<f64> {
        match self.distribution {
            ComputeDistribution::Deterministic { latency } => Some(latency * self.scale(data_size)),
            _ => None,
        }
    }
}

fn exp_cdf(t: f64, mean: f64) -> f64 {
    if mean == 0.0 {
        1.0
    } else {
        -(-t / mean).exp_m1()
    }
}

fn exp_sample<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> f64 {
    let u: f64 = rng.random();
    -mean * (-u).ln_1p()
}
