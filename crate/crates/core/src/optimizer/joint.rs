//! Alternating altitude/power optimization and the single-parameter baselines.

use serde::{Deserialize, Serialize};

use super::search::{golden_section, quasi_newton};
use super::{Method, OptimizationResult, OptimizerConfig, Probe, Problem, Tracer};
use crate::error::{Error, Result};
use crate::units;

/// Best altitude for a fixed power (dBW), by golden-section search.
pub fn optimize_altitude(
    problem: &Problem,
    power_dbw: f64,
    cfg: &OptimizerConfig,
) -> Result<(Probe, usize)> {
    let b = &problem.bounds;
    let out = golden_section(
        |h| problem.probe(h, power_dbw),
        b.altitude_min,
        b.altitude_max,
        cfg.altitude_tol,
        cfg.golden_max_probes,
    )?;
    Ok((out.best, out.evaluations))
}

/// Best power (dBW) for a fixed altitude, by quasi-Newton ascent from `start`.
pub fn optimize_power(
    problem: &Problem,
    start: Probe,
    cfg: &OptimizerConfig,
) -> Result<(Probe, usize)> {
    let (lo, hi) = problem.bounds.power_dbw();
    let h = start.altitude;
    let out = quasi_newton(
        |p| problem.probe(h, p),
        start.power_dbw,
        start,
        lo,
        hi,
        &cfg.quasi_newton,
    )?;
    Ok((out.best, out.evaluations))
}

fn clamp_start(problem: &Problem, h: f64, p_dbw: f64) -> (f64, f64) {
    let b = &problem.bounds;
    let (lo, hi) = b.power_dbw();
    (h.clamp(b.altitude_min, b.altitude_max), p_dbw.clamp(lo, hi))
}

/// Leave a corner of a constraint boundary that couples both variables.
///
/// When the battery limit binds, the best power depends on the altitude and
/// vice versa, so the alternation can stop at a point where neither search
/// alone improves. Shifting the power by a shrinking offset before the
/// altitude search lets the pair slide along the boundary.
fn escape_boundary(
    problem: &Problem,
    current: Probe,
    cfg: &OptimizerConfig,
) -> Result<(Option<Probe>, usize)> {
    let (lo, hi) = problem.bounds.power_dbw();
    let mut evaluations = 0;
    for &offset in &cfg.escape_offsets_db {
        for sign in [-1.0, 1.0] {
            let p = (current.power_dbw + sign * offset).clamp(lo, hi);
            if p == current.power_dbw {
                continue;
            }
            let (alt, n) = optimize_altitude(problem, p, cfg)?;
            evaluations += n;
            if !alt.feasible {
                continue;
            }
            let (pow, n) = optimize_power(problem, alt, cfg)?;
            evaluations += n;
            if pow.beats(&current) {
                return Ok((Some(pow), evaluations));
            }
        }
    }
    Ok((None, evaluations))
}

/// Alternate altitude and power searches until the best objective stalls
/// over the configured window, then re-validate the result. An infeasible
/// result falls back to the configured safe point.
pub fn joint_optimize(problem: &Problem, cfg: &OptimizerConfig) -> Result<OptimizationResult> {
    problem.validate()?;
    cfg.validate(&problem.bounds)?;

    let (h0, p0) = clamp_start(problem, cfg.initial_altitude, cfg.initial_power_dbw);
    let mut current = problem.probe(h0, p0)?;
    let mut evaluations = 1;
    let mut tracer = Tracer::new();
    tracer.record(0, &current);
    let mut history = vec![current.objective];
    let mut iterations = 0;

    for it in 1..=cfg.max_iter {
        iterations = it;
        let before = current;

        let (alt, n) = optimize_altitude(problem, current.power_dbw, cfg)?;
        evaluations += n;
        if alt.beats(&current) {
            current = alt;
        }
        let (pow, n) = optimize_power(problem, current, cfg)?;
        evaluations += n;
        if pow.beats(&current) {
            current = pow;
        }

        let mut stalled =
            current.altitude == before.altitude && current.power_dbw == before.power_dbw;
        if stalled {
            let (escaped, n) = escape_boundary(problem, current, cfg)?;
            evaluations += n;
            if let Some(better) = escaped {
                current = better;
                stalled = false;
            }
        }

        tracer.record(it, &current);
        history.push(current.objective);
        log::debug!(
            "joint iteration {it}: h = {:.2} m, P = {:.3} dBW, objective = {:.6}",
            current.altitude,
            current.power_dbw,
            current.objective
        );

        if stalled {
            break;
        }
        if it >= cfg.window && current.objective - history[it - cfg.window] < cfg.epsilon {
            break;
        }
    }

    let report = problem.feasibility(current.power_watts(), current.altitude)?;
    let mut result = if report.feasible {
        OptimizationResult::from_probe(Method::Joint, "joint", &current)
    } else {
        let (h, p) = (cfg.fallback_altitude, cfg.fallback_power_dbw);
        let fallback = problem.probe(h, p)?;
        evaluations += 1;
        if !fallback.feasible {
            return Err(Error::InfeasibleFallback {
                altitude: h,
                power: units::dbw_to_watts(p),
                battery: problem.budgets.battery,
                fuel: problem.budgets.fuel,
            });
        }
        log::warn!(
            "joint optimum violates {:?}; reverting to the fallback point",
            report.violations
        );
        let mut r = OptimizationResult::from_probe(Method::Joint, "joint", &fallback);
        r.fallback_used = true;
        r
    };
    result.iterations = iterations;
    result.evaluations = evaluations;
    result.trace = tracer.entries;
    Ok(result)
}

/// Comparison strategies that optimize at most one variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Baseline {
    /// Power search at a pinned altitude, m.
    PowerOnly {
        altitude: f64,
    },
    /// Altitude search at a pinned power, dBW.
    AltitudeOnly {
        power_dbw: f64,
    },
    Static {
        altitude: f64,
        power_dbw: f64,
    },
}

impl Baseline {
    /// The five comparison strategies used throughout the experiments.
    pub fn standard() -> [Baseline; 5] {
        [
            Baseline::PowerOnly { altitude: 50.0 },
            Baseline::AltitudeOnly { power_dbw: 5.0 },
            Baseline::Static {
                altitude: 100.0,
                power_dbw: 10.0,
            },
            Baseline::Static {
                altitude: 50.0,
                power_dbw: 10.0,
            },
            Baseline::Static {
                altitude: 50.0,
                power_dbw: 5.0,
            },
        ]
    }

    pub fn label(&self) -> String {
        match *self {
            Baseline::PowerOnly { .. } => "power_only".into(),
            Baseline::AltitudeOnly { .. } => "altitude_only".into(),
            Baseline::Static {
                altitude,
                power_dbw,
            } => format!("static_{altitude}m_{power_dbw}dBW"),
        }
    }
}

pub fn baseline(
    kind: Baseline,
    problem: &Problem,
    cfg: &OptimizerConfig,
) -> Result<OptimizationResult> {
    problem.validate()?;
    let mut tracer = Tracer::new();
    let (best, method, evaluations) = match kind {
        Baseline::PowerOnly { altitude } => {
            let start = problem.probe(altitude, cfg.initial_power_dbw)?;
            tracer.record(0, &start);
            let (best, n) = optimize_power(problem, start, cfg)?;
            (best, Method::PowerOnly, n + 1)
        }
        Baseline::AltitudeOnly { power_dbw } => {
            let (best, n) = optimize_altitude(problem, power_dbw, cfg)?;
            (best, Method::AltitudeOnly, n)
        }
        Baseline::Static {
            altitude,
            power_dbw,
        } => (problem.probe(altitude, power_dbw)?, Method::Static, 1),
    };
    // Searches rank infeasible probes by their overrun; only a feasible probe
    // carries a nonzero objective.
    tracer.record(1, &best);
    let mut r = OptimizationResult::from_probe(method, kind.label(), &best);
    r.iterations = 1;
    r.evaluations = evaluations;
    r.trace = tracer.entries;
    Ok(r)
}

/// Joint optimization followed by the five standard baselines.
pub fn run_all_strategies(
    problem: &Problem,
    cfg: &OptimizerConfig,
) -> Result<Vec<OptimizationResult>> {
    let mut out = vec![joint_optimize(problem, cfg)?];
    for kind in Baseline::standard() {
        out.push(baseline(kind, problem, cfg)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::EnergyBudgets;

    #[test]
    fn unconstrained_joint_pushes_power_to_the_top() {
        let problem = Problem::default();
        let r = joint_optimize(&problem, &OptimizerConfig::default()).unwrap();
        assert!(r.feasible && !r.fallback_used);
        assert!(r.p_star_dbw > 29.9, "{}", r.p_star_dbw);
        assert!(r.objective > 0.9, "{}", r.objective);
    }

    #[test]
    fn trace_best_is_non_decreasing() {
        let problem = Problem::default().with_budgets(EnergyBudgets::new(40.0, 40_000.0));
        let r = joint_optimize(&problem, &OptimizerConfig::default()).unwrap();
        for w in r.trace.windows(2) {
            assert!(w[1].best_objective >= w[0].best_objective);
        }
        assert!(r.feasible);
    }

    #[test]
    fn zero_battery_errors_out() {
        let problem = Problem::default().with_budgets(EnergyBudgets::new(0.0, f64::INFINITY));
        match joint_optimize(&problem, &OptimizerConfig::default()) {
            Err(Error::InfeasibleFallback { battery, .. }) => assert_eq!(battery, 0.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn static_infeasible_reports_zero() {
        let problem = Problem::default().with_budgets(EnergyBudgets::new(100.0, 35_000.0));
        let r = baseline(
            Baseline::Static {
                altitude: 100.0,
                power_dbw: 10.0,
            },
            &problem,
            &OptimizerConfig::default(),
        )
        .unwrap();
        assert!(!r.feasible);
        assert_eq!(r.objective, 0.0);
    }

    #[test]
    fn joint_dominates_baselines_at_moderate_budgets() {
        let problem = Problem::default().with_budgets(EnergyBudgets::new(40.0, 40_000.0));
        let all = run_all_strategies(&problem, &OptimizerConfig::default()).unwrap();
        let joint = all[0].objective;
        for r in &all[1..] {
            assert!(
                joint >= r.objective - 1e-6,
                "{} {} > {}",
                r.label,
                r.objective,
                joint
            );
        }
    }

    #[test]
    fn deterministic_result() {
        let problem = Problem::default().with_budgets(EnergyBudgets::new(60.0, 45_000.0));
        let a = joint_optimize(&problem, &OptimizerConfig::default()).unwrap();
        let b = joint_optimize(&problem, &OptimizerConfig::default()).unwrap();
        assert_eq!(a, b);
    }
}
