use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion, Throughput};
use sachem_bench::{engine_at, PAPER_SCALE};
use sachem_core::{compute_metrics, SimConfig};

fn generation_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("step");
    group.sample_size(10);
    // Per-step time should grow linearly with population size.
    for per_kind in [500, 1000, 2000, PAPER_SCALE] {
        let (engine, state) = engine_at(per_kind, 0);
        group.throughput(Throughput::Elements(3 * per_kind as u64));
        group.bench_with_input(BenchmarkId::from_parameter(per_kind), &state, |b, s| {
            b.iter_batched(|| s.clone(), |s| engine.step(&s).unwrap(), BatchSize::LargeInput)
        });
    }
    group.finish();
}

fn metrics_emission(c: &mut Criterion) {
    let mut group = c.benchmark_group("metrics");
    group.sample_size(10);
    for per_kind in [500, 1000] {
        let (engine, state) = engine_at(per_kind, 0);
        let mut config: SimConfig = engine.config().clone();
        config.metrics.cadence = 1;
        config.metrics.sample_size = per_kind;
        group.bench_with_input(BenchmarkId::from_parameter(per_kind), &state, |b, s| {
            b.iter(|| compute_metrics(&s.population, s.step, &config, 0.0).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, generation_step, metrics_emission);
criterion_main!(benches);
