//! Shared fixtures for the criterion benches.

use uavcpn::{ComputeDistribution, EnergyBudgets, Problem};

/// Budgets tight enough that both energy constraints bind somewhere.
pub fn budgeted_problem() -> Problem {
    Problem::default().with_budgets(EnergyBudgets::new(60.0, 45_000.0))
}

pub fn exponential_problem() -> Problem {
    let mut p = budgeted_problem();
    p.analysis.compute.distribution = ComputeDistribution::Exponential { mean: 2e-3 };
    p
}
