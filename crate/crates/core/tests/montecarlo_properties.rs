use std::f64::consts::PI;

use uavcpn::montecarlo::{
    estimate_average_success, estimate_success_at, sample_cn_field, sample_rng,
};
use uavcpn::{
    average_success_probability, success_probability, AnalysisParams, ChannelMode, ComputeModel,
    SimConfig,
};

fn sim(trials: u64, seed: u64, mode: ChannelMode) -> SimConfig {
    SimConfig {
        trials,
        seed,
        channel_mode: mode,
        ..SimConfig::default()
    }
}

#[test]
fn field_counts_are_poisson() {
    let (density, window) = (5e-6, 1000.0);
    let mean = density * PI * window * window;
    let n = 40_000u64;
    let counts: Vec<f64> = (0..n)
        .map(|i| sample_cn_field(&mut sample_rng(11, i), density, window).len() as f64)
        .collect();
    let m = counts.iter().sum::<f64>() / n as f64;
    let var = counts.iter().map(|c| (c - m).powi(2)).sum::<f64>() / (n - 1) as f64;
    assert!(
        (m - mean).abs() < 4.0 * (mean / n as f64).sqrt(),
        "mean {m} vs {mean}"
    );
    // The dispersion index of a Poisson count is 1; its sampling sd is about sqrt(2 / n).
    assert!(
        (var / m - 1.0).abs() < 5.0 * (2.0 / n as f64).sqrt(),
        "index {}",
        var / m
    );
}

#[test]
fn field_is_stationary_across_annuli() {
    // Equal-area annuli receive equal expected counts.
    let window = 1000.0;
    let edges: Vec<f64> = (0..=4).map(|k| window * (k as f64 / 4.0).sqrt()).collect();
    let mut counts = [0u64; 4];
    for i in 0..20_000 {
        for r in sample_cn_field(&mut sample_rng(12, i), 5e-6, window) {
            let k = edges
                .windows(2)
                .position(|w| r >= w[0] && r < w[1])
                .unwrap_or(3);
            counts[k] += 1;
        }
    }
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / 4.0;
    let chi2: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    // 3 degrees of freedom, 99.9th percentile.
    assert!(chi2 < 16.27, "chi2 {chi2} counts {counts:?}");
}

#[test]
fn mean_power_mode_agrees_with_analysis() {
    let mut inside = 0;
    let mut total = 0;
    for (i, &h) in [60.0, 150.0, 300.0, 600.0].iter().enumerate() {
        for (j, &tc) in [0.2e-3, 2e-3].iter().enumerate() {
            let p = AnalysisParams {
                compute: ComputeModel::deterministic(tc),
                ..AnalysisParams::default()
            }
            .at_operating_point(h, 100.0);
            let analytic = average_success_probability(&p).unwrap();
            let est = estimate_average_success(
                &sim(40_000, (10 * i + j) as u64, ChannelMode::MeanPower),
                &p,
            )
            .unwrap();
            total += 1;
            if est.contains(analytic) {
                inside += 1;
            }
        }
    }
    assert!(inside >= total - 1, "{inside}/{total}");
}

#[test]
fn pinned_gu_agrees_with_per_gu_probability() {
    let p = AnalysisParams {
        compute: ComputeModel::exponential(3e-3),
        ..AnalysisParams::default()
    };
    for (k, r_u) in [0.0, 120.0, 200.0].into_iter().enumerate() {
        let exact = success_probability(r_u, &p).unwrap();
        let est = estimate_success_at(&sim(40_000, 90 + k as u64, ChannelMode::MeanPower), r_u, &p)
            .unwrap();
        assert!(
            est.contains(exact),
            "r_u {r_u}: {exact} not in [{}, {}]",
            est.ci_low,
            est.ci_high
        );
    }
}

#[test]
fn estimates_ignore_thread_count() {
    let p = AnalysisParams::default().at_operating_point(250.0, 100.0);
    for mode in [ChannelMode::MeanPower, ChannelMode::Bernoulli] {
        let cfg = sim(10_000, 5, mode);
        let serial = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| estimate_average_success(&cfg, &p).unwrap());
        let parallel = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| estimate_average_success(&cfg, &p).unwrap());
        assert_eq!(serial, parallel);
    }
}

#[test]
fn different_seeds_differ() {
    let p = AnalysisParams::default();
    let a = estimate_average_success(&sim(5_000, 1, ChannelMode::MeanPower), &p).unwrap();
    let b = estimate_average_success(&sim(5_000, 2, ChannelMode::MeanPower), &p).unwrap();
    assert_ne!(a.value, b.value);
}

#[test]
fn bernoulli_mode_stays_a_probability() {
    let p = AnalysisParams::default().at_operating_point(400.0, 100.0);
    let est = estimate_average_success(&sim(5_000, 3, ChannelMode::Bernoulli), &p).unwrap();
    assert!(
        est.ci_low >= 0.0
            && est.ci_high <= 1.0
            && est.ci_low <= est.value
            && est.value <= est.ci_high
    );
}
