use std::hint::black_box;
use std::time::Duration;

use aptring_bench::{cos_cos, ep_speeds, transport};
use aptring_core::fdsolver::{simulate, DtPolicy, NullSink, Rk4};
use aptring_core::propagator::evolve;
use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion};

fn bench_spectral(c: &mut Criterion) {
    let t = transport();
    let mut group = c.benchmark_group("spectral_evolve");
    for len in [128, 256, 512] {
        let f0 = cos_cos(len);
        group.bench_with_input(BenchmarkId::from_parameter(len), &f0, |b, f0| {
            b.iter(|| evolve(black_box(f0), 10.0, ep_speeds(), &t))
        });
    }
    group.finish();
}

fn bench_fd_step(c: &mut Criterion) {
    let t = transport();
    let mut group = c.benchmark_group("fd_rk4_step");
    for len in [128, 256, 512] {
        let f0 = cos_cos(len);
        let mut rk4 = Rk4::new(&f0.grid, ep_speeds(), &t).unwrap();
        let dt = DtPolicy::default().dt_max(&f0.grid, ep_speeds(), &t);
        group.bench_with_input(BenchmarkId::from_parameter(len), &f0, |b, f0| {
            b.iter_batched_ref(|| f0.clone(), |s| rk4.step(s, dt), BatchSize::SmallInput)
        });
    }
    group.finish();
}

fn bench_fd_run(c: &mut Criterion) {
    let t = transport();
    let f0 = cos_cos(256);
    let mut group = c.benchmark_group("fd_run");
    group.measurement_time(Duration::from_secs(10)).sample_size(10);
    group.bench_function("ep_n256_t10", |b| {
        b.iter(|| simulate(black_box(&f0), 10.0, DtPolicy::default(), ep_speeds(), &t, &mut NullSink))
    });
    group.finish();
}

criterion_group!(benches, bench_spectral, bench_fd_step, bench_fd_run);
criterion_main!(benches);
