//! Sequential vs parallel backend on a desk-scale entangling-power curve.
//!
//! Build without default features to time the sequential fallback alone:
//! `cargo bench -p entangling-power --no-default-features`.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use entangling_power::montecarlo::{
    run_with_backend, Backend, Ensemble, ExperimentConfig, ExperimentKind, StateMode,
};

fn backends(c: &mut Criterion) {
    let threads = std::thread::available_parallelism().map_or(2, |n| n.get().max(2));
    let cases = [
        (
            "ep-curve",
            ExperimentConfig::new(
                ExperimentKind::EpCurve,
                Ensemble::Cue,
                StateMode::FixedProduct,
                4,
                5,
            ),
        ),
        (
            "asymptotic",
            ExperimentConfig::new(
                ExperimentKind::Asymptotic,
                Ensemble::Coe,
                StateMode::RandomComplexProduct,
                4,
                5,
            ),
        ),
    ];
    for (name, cfg) in cases {
        let cfg = cfg.with_samples(1024).with_seed(1);
        let mut group = c.benchmark_group(name);
        group.sample_size(10);
        group.throughput(Throughput::Elements(cfg.samples));
        for backend in [Backend::Sequential, Backend::Parallel(threads)] {
            let label = match backend {
                Backend::Sequential => "sequential".to_string(),
                Backend::Parallel(t) => format!("parallel-{t}"),
            };
            group.bench_with_input(
                BenchmarkId::from_parameter(label),
                &backend,
                |b, &backend| b.iter(|| run_with_backend(&cfg, backend).unwrap()),
            );
        }
        group.finish();
    }
}

criterion_group!(benches, backends);
criterion_main!(benches);
