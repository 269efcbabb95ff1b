use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use surfdec_bench::{perturbed_cone, torus};
use surfdec_core::partition::{flatness_reports, DEFAULT_CONTAINMENT};
use surfdec_core::{build_partition, find_curvature_zeros};

fn zero_search(c: &mut Criterion) {
    let (t, pc) = (torus(), perturbed_cone());
    c.bench_function("zeros/torus", |b| {
        b.iter(|| find_curvature_zeros(black_box(&t), 1e-10).unwrap())
    });
    c.bench_function("zeros/perturbed-cone", |b| {
        b.iter(|| find_curvature_zeros(black_box(&pc), 1e-10).unwrap())
    });
}

fn partition(c: &mut Criterion) {
    let mut g = c.benchmark_group("partition");
    g.sample_size(10);
    for (name, p) in [("torus", torus()), ("perturbed-cone", perturbed_cone())] {
        for k in [8, 10] {
            let delta = f64::powi(2.0, -k);
            g.bench_function(format!("build/{name}/2^-{k}"), |b| {
                b.iter(|| build_partition(black_box(&p), delta).unwrap())
            });
            let m = build_partition(&p, delta).unwrap();
            g.bench_function(format!("flatness/{name}/2^-{k}"), |b| {
                b.iter(|| flatness_reports(black_box(&m), &p, DEFAULT_CONTAINMENT))
            });
        }
    }
    g.finish();
}

criterion_group!(benches, zero_search, partition);
criterion_main!(benches);
