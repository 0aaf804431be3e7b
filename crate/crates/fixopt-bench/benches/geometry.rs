//! Microbenchmarks of the disk kernels: exp, log, dist, transport.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use fixopt_bench::GeometryInputs;

fn bench_geometry(c: &mut Criterion) {
    for dim in [2usize, 16] {
        let inputs = GeometryInputs::generate(dim, 256, 11);
        let disk = inputs.disk;
        let mut group = c.benchmark_group(format!("disk-{dim}d"));
        let cycle = |k: &mut usize| {
            let i = *k % inputs.pairs.len();
            *k += 1;
            i
        };

        group.bench_function("exp", |b| {
            let mut k = 0;
            b.iter(|| {
                let i = cycle(&mut k);
                let (x, _) = &inputs.pairs[i];
                black_box(disk.exp(black_box(x), black_box(&inputs.tangents[i])))
            })
        });
        group.bench_function("log", |b| {
            let mut k = 0;
            b.iter(|| {
                let i = cycle(&mut k);
                let (x, y) = &inputs.pairs[i];
                black_box(disk.log(black_box(x), black_box(y)))
            })
        });
        group.bench_function("dist", |b| {
            let mut k = 0;
            b.iter(|| {
                let i = cycle(&mut k);
                let (x, y) = &inputs.pairs[i];
                black_box(disk.dist(black_box(x), black_box(y)))
            })
        });
        group.bench_function("transport", |b| {
            let mut k = 0;
            b.iter(|| {
                let i = cycle(&mut k);
                let (x, y) = &inputs.pairs[i];
                black_box(disk.transport(black_box(x), black_box(y), black_box(&inputs.tangents[i])))
            })
        });
        group.finish();
    }
}

criterion_group!(benches, bench_geometry);
criterion_main!(benches);
