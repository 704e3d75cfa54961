use std::f64::consts::PI;

use proptest::prelude::*;

use uavcpn::units::per_km2;
use uavcpn::{
    average_success_probability, effective_density, max_service_radius, qualified_intensity,
    radius_for_budget, success_probability, uplink_latency, AnalysisParams, ComputeModel,
};

fn with_compute(compute: ComputeModel) -> AnalysisParams {
    AnalysisParams {
        compute,
        ..AnalysisParams::default()
    }
}

#[test]
fn void_probability_inverts_to_intensity() {
    for compute in [
        ComputeModel::deterministic(2e-3),
        ComputeModel::exponential(5e-3),
        ComputeModel::shifted_exponential(1e-3, 3e-3),
        ComputeModel::empirical(vec![1e-3, 4e-3, 9e-3, 2e-2]),
    ] {
        let p = with_compute(compute);
        for r_u in [0.0, 60.0, 130.0, 200.0] {
            let lam = qualified_intensity(r_u, &p).unwrap();
            let ps = success_probability(r_u, &p).unwrap();
            assert!((-(-ps).ln_1p() - lam).abs() <= 1e-12 * lam.max(1.0));
        }
    }
}

#[test]
fn instant_compute_leaves_the_full_disk() {
    let p = with_compute(ComputeModel::deterministic(0.0));
    for r_u in [0.0, 75.0, 200.0] {
        let r = max_service_radius(r_u, &p).unwrap();
        let disk = p.geometry.cn_density * PI * r * r;
        assert!((qualified_intensity(r_u, &p).unwrap() - disk).abs() <= 1e-12 * disk);
    }
}

#[test]
fn deterministic_compute_matches_closed_form() {
    for tc in [0.2e-3, 2e-3, 5e-3, 20e-3] {
        let p = with_compute(ComputeModel::deterministic(tc));
        for h in [50.0, 200.0, 500.0] {
            let q = p.at_operating_point(h, 100.0);
            for r_u in [0.0, 100.0, 200.0] {
                let residual = q.task.max_latency - uplink_latency(r_u, &q) - tc;
                let r = radius_for_budget(residual, &q).unwrap();
                let closed = q.geometry.cn_density * PI * r * r;
                let got = qualified_intensity(r_u, &q).unwrap();
                assert!(
                    (got - closed).abs() <= 10.0 * q.quadrature_rel_tol * closed,
                    "tc {tc} h {h} r_u {r_u}: {got} vs {closed}"
                );
            }
        }
    }
}

#[test]
fn effective_density_is_a_thinning() {
    let p = with_compute(ComputeModel::exponential(3e-3));
    for r_c in [0.0, 100.0, 400.0, 900.0, 5000.0] {
        let d = effective_density(50.0, r_c, &p).unwrap();
        assert!(d >= 0.0 && d <= p.geometry.cn_density);
    }
}

#[test]
fn average_grows_with_cn_density() {
    let mut last = -1.0;
    for d in [0.5, 1.0, 2.0, 5.0, 10.0, 50.0] {
        let mut p = AnalysisParams::default();
        p.geometry.cn_density = per_km2(d);
        let s = average_success_probability(&p).unwrap();
        assert!(s >= last - 1e-12, "density {d}: {s} < {last}");
        last = s;
    }
}

#[test]
fn average_grows_with_deadline() {
    let mut last = -1.0;
    for t in [0.02, 0.03, 0.045, 0.055, 0.08, 0.2] {
        let mut p = AnalysisParams::default();
        p.task.max_latency = t;
        let s = average_success_probability(&p).unwrap();
        assert!(s >= last - 1e-12, "deadline {t}: {s} < {last}");
        last = s;
    }
}

#[test]
fn zero_data_task_reduces_to_compute_only() {
    let mut p = AnalysisParams::default();
    p.task.data_size = 0.0;
    p.geometry.service_cap = Some(300.0);
    let expected = 1.0 - (-p.geometry.cn_density * PI * 300.0 * 300.0).exp();
    assert!((average_success_probability(&p).unwrap() - expected).abs() < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn success_falls_with_gu_distance(h in 50.0..800.0f64, p_db in 0.0..30.0f64, tc in 0.0..0.01f64) {
        let p = with_compute(ComputeModel::deterministic(tc)).at_operating_point(h, 10f64.powf(p_db / 10.0));
        let mut last = 1.0;
        for i in 0..=10 {
            let s = success_probability(20.0 * i as f64, &p).unwrap();
            prop_assert!((0.0..=1.0).contains(&s));
            prop_assert!(s <= last + 1e-12);
            last = s;
        }
    }

    #[test]
    fn average_is_a_probability(h in 50.0..800.0f64, p_db in 0.0..30.0f64, mean in 0.0..0.02f64) {
        let p = with_compute(ComputeModel::exponential(mean)).at_operating_point(h, 10f64.powf(p_db / 10.0));
        let s = average_success_probability(&p).unwrap();
        prop_assert!((0.0..=1.0).contains(&s));
    }
}
