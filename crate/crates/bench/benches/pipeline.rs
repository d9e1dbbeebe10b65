use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use uc_bench::{cooling_curve, synthetic_instance};
use uc_core::instance::StartupCostCurve;
use uc_core::model::{build_model, thin_all};
use uc_core::solve::{solve_exact, write_lp, write_mps, SolverConfig};
use uc_core::thin_curve;

fn thinning(c: &mut Criterion) {
    let mut group = c.benchmark_group("thin_curve");
    for len in [71, 200, 1000] {
        let curve = StartupCostCurve::from_values(1, &cooling_curve(len));
        group.bench_with_input(BenchmarkId::from_parameter(len), &curve, |b, curve| {
            b.iter(|| thin_curve(black_box(curve), 0.05).unwrap())
        });
    }
    group.finish();
}

fn building(c: &mut Criterion) {
    let mut group = c.benchmark_group("build_model");
    for (units, periods) in [(2, 24), (10, 48), (30, 168)] {
        let instance = synthetic_instance(units, periods);
        let thinned = thin_all(&instance, 0.05).unwrap();
        group.bench_function(
            BenchmarkId::from_parameter(format!("{units}x{periods}")),
            |b| b.iter(|| build_model(black_box(&instance), &thinned).unwrap()),
        );
    }
    group.finish();
}

fn writing(c: &mut Criterion) {
    let instance = synthetic_instance(10, 48);
    let model = build_model(&instance, &thin_all(&instance, 0.05).unwrap()).unwrap();
    c.bench_function("write_mps/10x48", |b| {
        b.iter(|| write_mps(black_box(&model)))
    });
    c.bench_function("write_lp/10x48", |b| b.iter(|| write_lp(black_box(&model))));
}

fn exact(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_exact");
    group.sample_size(10);
    for (units, periods) in [(1, 4), (2, 4), (2, 6)] {
        let instance = synthetic_instance(units, periods);
        let model = build_model(&instance, &thin_all(&instance, 0.05).unwrap()).unwrap();
        group.bench_function(
            BenchmarkId::from_parameter(format!("{units}x{periods}")),
            |b| b.iter(|| solve_exact(black_box(&model), &SolverConfig::default()).unwrap()),
        );
    }
    group.finish();
}

criterion_group!(benches, thinning, building, writing, exact);
criterion_main!(benches);
