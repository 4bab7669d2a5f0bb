use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use conesmooth::simplex::project_simplex;
use conesmooth::{estimate_core, PlantedMinimax, SmoothingSpec, Surrogate, Variant};
use conesmooth_bench::{cones, max_smoothing, points, polytope};

fn simplex(c: &mut Criterion) {
    let mut g = c.benchmark_group("project_simplex");
    for d in [8, 64, 512] {
        let xs = points(d, 3.0, 64);
        g.bench_with_input(BenchmarkId::from_parameter(d), &xs, |b, xs| {
            b.iter(|| xs.iter().map(|x| project_simplex(black_box(x))[0]).sum::<f64>())
        });
    }
    g.finish();
}

fn max_eval(c: &mut Criterion) {
    let mut g = c.benchmark_group("max_value_grad");
    for d in [5, 50, 500] {
        let s = max_smoothing(d, Variant::MinGeneral);
        let xs = points(d, 3.0, 64);
        g.bench_with_input(BenchmarkId::from_parameter(d), &xs, |b, xs| {
            b.iter(|| xs.iter().map(|x| s.value_grad(black_box(x)).unwrap().0).sum::<f64>())
        });
    }
    g.finish();
}

fn polytope_max(c: &mut Criterion) {
    let f = polytope(4, 24);
    let s = SmoothingSpec::for_function(&f, Variant::MaxGeneral, 1.0).unwrap();
    let xs = points(4, 3.0, 16);
    c.bench_function("polytope_max_general_4x24", |b| {
        b.iter(|| xs.iter().map(|x| s.value_grad(black_box(x)).unwrap().0).sum::<f64>())
    });
}

fn cone_projection(c: &mut Criterion) {
    let mut g = c.benchmark_group("cone_project");
    for (name, k) in cones() {
        let xs = points(k.ambient_dim(), 3.0, 32);
        g.bench_with_input(BenchmarkId::from_parameter(name), &xs, |b, xs| {
            b.iter(|| xs.iter().map(|x| k.project(black_box(x)).unwrap().point[0]).sum::<f64>())
        });
    }
    g.finish();
}

fn core_estimate(c: &mut Criterion) {
    let mut g = c.benchmark_group("estimate_core");
    g.sample_size(10);
    for (name, k) in cones() {
        g.bench_function(name, |b| b.iter(|| estimate_core(black_box(&k), 2000, 7).unwrap().width_estimate));
    }
    g.finish();
}

fn minimax(c: &mut Criterion) {
    let inst = PlantedMinimax::generate(32, 6, 7).unwrap();
    let mut g = c.benchmark_group("planted_minimax_32x6");
    g.sample_size(10);
    for s in [Surrogate::OptimalGeneral, Surrogate::LogSumExp] {
        g.bench_function(s.name(), |b| b.iter(|| inst.solve(s, 2e-2, 1_000_000).unwrap().iterations));
    }
    g.finish();
}

criterion_group!(benches, simplex, max_eval, polytope_max, cone_projection, core_estimate, minimax);
criterion_main!(benches);
