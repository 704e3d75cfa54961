use proptest::prelude::*;

use uavcpn::optimizer::{
    baseline, bayesian_optimize, grid_search_oracle, joint_optimize, performance_gain, Baseline,
    BayesConfig, OptimizerConfig,
};
use uavcpn::{EnergyBudgets, Problem};

fn problem(battery: f64, fuel: f64) -> Problem {
    Problem::default().with_budgets(EnergyBudgets::new(battery, fuel))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn joint_result_is_sound_and_dominant(battery in 20.0..120.0f64, fuel in 30_000.0..60_000.0f64) {
        let pr = problem(battery, fuel);
        let cfg = OptimizerConfig::default();
        let r = joint_optimize(&pr, &cfg).unwrap();
        prop_assert!((0.0..=1.0).contains(&r.objective));
        if r.feasible {
            prop_assert!(pr.feasibility(r.p_star, r.h_star).unwrap().feasible);
        }
        for w in r.trace.windows(2) {
            prop_assert!(w[1].best_objective >= w[0].best_objective);
        }
        for kind in Baseline::standard() {
            let b = baseline(kind, &pr, &cfg).unwrap();
            prop_assert!(r.objective >= b.objective - 1e-6, "{} beats joint", b.label);
            if b.feasible {
                prop_assert!(pr.feasibility(b.p_star, b.h_star).unwrap().feasible);
            }
        }
    }
}

#[test]
fn unconstrained_joint_is_near_the_grid_optimum() {
    let pr = Problem::default();
    let joint = joint_optimize(&pr, &OptimizerConfig::default()).unwrap();
    let grid = grid_search_oracle(&pr, 20, 20).unwrap();
    assert!(joint.objective >= 0.98 * grid.objective);
}

#[test]
fn grid_refinement_never_hurts() {
    let pr = problem(70.0, 50_000.0);
    let coarse = grid_search_oracle(&pr, 6, 6).unwrap();
    let fine = grid_search_oracle(&pr, 11, 11).unwrap();
    assert!(fine.objective >= coarse.objective);
}

#[test]
fn runs_are_deterministic() {
    let pr = problem(45.0, 42_000.0);
    let cfg = OptimizerConfig::default();
    assert_eq!(
        joint_optimize(&pr, &cfg).unwrap(),
        joint_optimize(&pr, &cfg).unwrap()
    );
    let bc = BayesConfig {
        seed: 11,
        ..BayesConfig::default()
    };
    assert_eq!(
        bayesian_optimize(&pr, &bc).unwrap(),
        bayesian_optimize(&pr, &bc).unwrap()
    );
}

#[test]
fn joint_gain_over_weakest_static_is_positive() {
    let cfg = OptimizerConfig::default();
    for (battery, fuel) in [(20.0, 30_000.0), (60.0, 45_000.0), (120.0, 60_000.0)] {
        let pr = problem(battery, fuel);
        let joint = joint_optimize(&pr, &cfg).unwrap();
        let fixed = baseline(
            Baseline::Static {
                altitude: 50.0,
                power_dbw: 5.0,
            },
            &pr,
            &cfg,
        )
        .unwrap();
        if let Some(g) = performance_gain(joint.objective, fixed.objective) {
            assert!(g > 0.0, "gain {g} at ({battery}, {fuel})");
        }
    }
}

#[test]
fn fallback_kicks_in_when_the_optimum_is_rejected() {
    // A one-iteration run from an infeasible start cannot reach feasibility
    // when the searches are starved; the safe point is then returned.
    let pr = problem(30.0, 31_000.0);
    let cfg = OptimizerConfig {
        max_iter: 1,
        initial_altitude: 800.0,
        initial_power_dbw: 30.0,
        golden_max_probes: 2,
        quasi_newton: uavcpn::optimizer::QuasiNewtonSettings {
            max_probes: 3,
            ..Default::default()
        },
        escape_offsets_db: Vec::new(),
        ..OptimizerConfig::default()
    };
    let r = joint_optimize(&pr, &cfg).unwrap();
    assert!(r.feasible);
    if r.fallback_used {
        assert_eq!(
            (r.h_star, r.p_star_dbw),
            (cfg.fallback_altitude, cfg.fallback_power_dbw)
        );
    }
}
