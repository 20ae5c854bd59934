use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use langevin_core::diagnostics::{kl_estimate, KlMethod};
use langevin_core::exec;
use langevin_core::potential::Builtin;
use langevin_core::ula::{run_chains, InitSpec, RunOptions};
use langevin_core::Seed;

fn chains(c: &mut Criterion) {
    let model = Builtin::CosinePerturbedQuadratic { amplitude: 0.5 }.build(4).unwrap();
    let init = InitSpec::Point(vec![0.0; 4]);
    let opts = RunOptions::default();
    let mut g = c.benchmark_group("ula_chains");
    g.sample_size(10);
    for n in [64usize, 512] {
        g.bench_with_input(BenchmarkId::new("sequential", n), &n, |b, &n| {
            b.iter(|| exec::sequential(|| run_chains(&model, 0.05, 2000, &init, n, Seed::new(1), &opts).unwrap()))
        });
        g.bench_with_input(BenchmarkId::new("rayon", n), &n, |b, &n| {
            b.iter(|| run_chains(&model, 0.05, 2000, &init, n, Seed::new(1), &opts).unwrap())
        });
    }
    g.finish();
}

fn bootstrap(c: &mut Criterion) {
    let model = Builtin::Gaussian.build(1).unwrap();
    let init = InitSpec::Point(vec![0.0]);
    let batch = run_chains(&model, 0.1, 500, &init, 20_000, Seed::new(2), &RunOptions::default()).unwrap().final_states;
    let mut g = c.benchmark_group("kl_bootstrap");
    g.sample_size(10);
    g.bench_function("sequential", |b| b.iter(|| exec::sequential(|| kl_estimate(&batch, &model, KlMethod::Knn, Seed::new(3)).unwrap())));
    g.bench_function("rayon", |b| b.iter(|| kl_estimate(&batch, &model, KlMethod::Knn, Seed::new(3)).unwrap()));
    g.finish();
}

criterion_group!(benches, chains, bootstrap);
criterion_main!(benches);
