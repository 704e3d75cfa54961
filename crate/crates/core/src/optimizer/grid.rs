use rayon::prelude::*;

use super::{Method, OptimizationResult, Probe, Problem, Tracer};
use crate::error::{ensure, Result};

pub(crate) fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let step = if n > 1 {
        (hi - lo) / (n - 1) as f64
    } else {
        0.0
    };
    (0..n).map(move |i| if i + 1 == n { hi } else { lo + step * i as f64 })
}

/// Exhaustive search over an `n_h x n_p` grid spanning the operating bounds
/// (power spaced evenly in dBW). Ties go to the first point in row-major
/// altitude-then-power order.
pub fn grid_search_oracle(problem: &Problem, n_h: usize, n_p: usize) -> Result<OptimizationResult> {
    ensure(
        n_h >= 2 && n_p >= 2,
        "grid",
        "needs at least 2 points per axis",
    )?;
    problem.validate()?;
    let b = &problem.bounds;
    let (p_lo, p_hi) = b.power_dbw();
    let powers: Vec<f64> = linspace(p_lo, p_hi, n_p).collect();
    let points: Vec<(f64, f64)> = linspace(b.altitude_min, b.altitude_max, n_h)
        .flat_map(|h| powers.iter().map(move |&p| (h, p)))
        .collect();
    let probes: Vec<Probe> = points
        .par_iter()
        .map(|&(h, p)| problem.probe(h, p))
        .collect::<Result<_>>()?;

    let mut best = probes[0];
    for p in &probes[1..] {
        if p.objective > best.objective
            || (!best.feasible && p.feasible && p.objective == best.objective)
        {
            best = *p;
        }
    }
    let mut tracer = Tracer::new();
    tracer.record(0, &best);
    let mut r = OptimizationResult::from_probe(Method::Grid, format!("grid_{n_h}x{n_p}"), &best);
    r.iterations = 1;
    r.evaluations = probes.len();
    r.trace = tracer.entries;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::EnergyBudgets;

    #[test]
    fn linspace_hits_both_ends() {
        let v: Vec<f64> = linspace(50.0, 800.0, 4).collect();
        assert_eq!(v, vec![50.0, 300.0, 550.0, 800.0]);
    }

    #[test]
    fn two_by_two_is_max_of_corners() {
        let problem = Problem::default().with_budgets(EnergyBudgets::new(50.0, 45_000.0));
        let r = grid_search_oracle(&problem, 2, 2).unwrap();
        let corners = [(50.0, 0.0), (50.0, 30.0), (800.0, 0.0), (800.0, 30.0)];
        let best = corners
            .iter()
            .map(|&(h, p)| problem.probe(h, p).unwrap().objective)
            .fold(0.0, f64::max);
        assert_eq!(r.objective, best);
        assert_eq!(r.evaluations, 4);
    }

    #[test]
    fn refining_never_hurts() {
        let problem = Problem::default().with_budgets(EnergyBudgets::new(60.0, 50_000.0));
        let coarse = grid_search_oracle(&problem, 3, 3).unwrap();
        let fine = grid_search_oracle(&problem, 5, 5).unwrap();
        assert!(fine.objective >= coarse.objective);
    }
}
