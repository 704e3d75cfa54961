use criterion::{criterion_group, criterion_main, Criterion};
use uavcpn::optimizer::{bayesian_optimize, grid_search_oracle, joint_optimize, BayesConfig};
use uavcpn::OptimizerConfig;
use uavcpn_bench::budgeted_problem;

fn optimizers(c: &mut Criterion) {
    let p = budgeted_problem();
    let mut g = c.benchmark_group("optimizer");
    g.sample_size(10);
    g.bench_function("joint", |b| {
        b.iter(|| joint_optimize(&p, &OptimizerConfig::default()).unwrap())
    });
    g.bench_function("bayesian", |b| {
        b.iter(|| bayesian_optimize(&p, &BayesConfig::default()).unwrap())
    });
    g.bench_function("grid_20x20", |b| {
        b.iter(|| grid_search_oracle(&p, 20, 20).unwrap())
    });
    g.finish();
}

criterion_group!(benches, optimizers);
criterion_main!(benches);
