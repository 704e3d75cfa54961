//! Task completion probability of UAV-enabled computing power networks.
//!
//! A UAV hovering above a circular request zone relays tasks from ground
//! users (GUs) to computing nodes (CNs) scattered as a Poisson point process.
//! This crate evaluates the probability that some CN finishes a task within
//! its deadline, both semi-analytically ([`analysis`]) and by simulation
//! ([`montecarlo`]), and maximizes it over UAV altitude and transmit power
//! under separate battery and fuel budgets ([`energy`], [`optimizer`]).

pub mod analysis;
pub mod channel;
pub mod compute;
pub mod energy;
pub mod error;
pub mod montecarlo;
pub mod optimizer;
pub mod quadrature;
pub mod units;

pub use analysis::{
    average_success_estimate, average_success_probability, effective_density, qualified_intensity,
    success_probability, AnalysisParams, EstimateMethod, SuccessEstimate,
};
pub use channel::{
    conditional_received_power, downlink_latency, link_rate, los_probability, max_service_radius,
    mean_received_power, radius_for_budget, uplink_latency, EnvironmentParams, GeometryParams,
    RadioParams, RadiusSolver, TaskSpec,
};
pub use compute::{ComputeDistribution, ComputeModel};
pub use energy::{
    EnergyBudgets, EnergyParams, FeasibilityReport, HoverTimePolicy, OperatingBounds,
};
pub use error::{Error, Result};
pub use montecarlo::{ChannelMode, SimConfig};
pub use optimizer::{OptimizationResult, OptimizerConfig, Problem};
