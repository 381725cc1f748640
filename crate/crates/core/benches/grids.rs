//! Data-parallel vs sequential grid evaluation.
//!
//! Compares the rayon-backed entry points against their `*_serial` twins on
//! representative workloads: the reduced-energy phase portrait and the
//! stream function of a ring.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

use mobius_vortex::dynamics::{stream_function_grid, stream_function_grid_serial};
use mobius_vortex::equilibria::{nring, NRingSpec};
use mobius_vortex::grid::GridSpec;
use mobius_vortex::reduced::{phase_portrait, phase_portrait_serial, ReducedParams};

const PI: f64 = std::f64::consts::PI;

fn bench_phase_portrait(c: &mut Criterion) {
    let params = ReducedParams::new(2.0, 1.0, 1.0).unwrap();
    let grid = GridSpec::new(-PI, PI, 400, -3.0, 3.0, 400);
    let mut group = c.benchmark_group("phase_portrait_400x400");
    group.sample_size(20);
    group.bench_function("parallel", |b| {
        b.iter_batched(
            || (),
            |_| phase_portrait(&params, &grid, 0.05).unwrap(),
            BatchSize::SmallInput,
        )
    });
    group.bench_function("serial", |b| {
        b.iter_batched(
            || (),
            |_| phase_portrait_serial(&params, &grid, 0.05).unwrap(),
            BatchSize::SmallInput,
        )
    });
    group.finish();
}

fn bench_stream_function(c: &mut Criterion) {
    let ring = nring(&NRingSpec::new(5, 1.0, 1.0)).unwrap();
    let grid = GridSpec::new(0.0, PI, 512, -2.5, 2.5, 512);
    let mut group = c.benchmark_group("stream_function_512x512");
    group.sample_size(20);
    group.bench_function("parallel", |b| {
        b.iter_batched(
            || (),
            |_| stream_function_grid(&ring, &grid, 1e-3).unwrap(),
            BatchSize::SmallInput,
        )
    });
    group.bench_function("serial", |b| {
        b.iter_batched(
            || (),
            |_| stream_function_grid_serial(&ring, &grid, 1e-3).unwrap(),
            BatchSize::SmallInput,
        )
    });
    group.finish();
}

criterion_group!(benches, bench_phase_portrait, bench_stream_function);
criterion_main!(benches);
