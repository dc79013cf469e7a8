use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ctimer_bench::{bridge_program, oximeter_program, oximeter_source};
use ctimer_core::scenarios::default_rates;
use ctimer_core::{explore, min_path_value, translate, Bounds, OximeterSpec, Rate, RunOptions, Strategy};

fn bridge(c: &mut Criterion) {
    let bounds = Bounds::default();
    let mut g = c.benchmark_group("bridge");
    for n in [3usize, 4, 5] {
        let times: Vec<u64> = [5, 10, 20, 25, 40][..n].to_vec();
        let program = bridge_program(&times, Strategy::Any);
        g.bench_with_input(BenchmarkId::new("explore", n), &program, |b, p| {
            b.iter(|| explore(black_box(p), &bounds, 1).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("min_path_value", n), &program, |b, p| {
            b.iter(|| min_path_value(black_box(p), &bounds, 0).unwrap())
        });
    }
    g.finish();
}

fn oximeter(c: &mut Criterion) {
    let bounds = Bounds::default();
    let src = oximeter_source(Rate::ZERO);
    c.bench_function("oximeter/translate", |b| {
        b.iter(|| translate("oximeter.c", black_box(&src), &Default::default()).unwrap())
    });
    let program = oximeter_program(Rate::ONE);
    c.bench_function("oximeter/explore_full_error_rate", |b| {
        b.iter(|| explore(black_box(&program), &bounds, 1).unwrap())
    });
    let rates = default_rates();
    let mut g = c.benchmark_group("oximeter/matrix");
    g.sample_size(20);
    for workers in [1usize, 4] {
        let opts = RunOptions {
            workers,
            ..Default::default()
        };
        g.bench_with_input(BenchmarkId::from_parameter(workers), &opts, |b, o| {
            b.iter(|| ctimer_core::run_matrix(&OximeterSpec::default(), &rates, o).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, bridge, oximeter);
criterion_main!(benches);
