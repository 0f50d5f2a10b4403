use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qhs_bench::{dihedral_instance, period_instance};
use qhs_core::{
    fourier_operator, offset_transversal, run_pipeline, shor_pipeline, shor_transversal,
    verify_representation_suite, BasisOrdering, FiniteGroup, PipelineConfig,
};
use std::hint::black_box;

fn fourier(c: &mut Criterion) {
    let mut g = c.benchmark_group("fourier_operator");
    for spec in ["Z64", "Z2^6", "D16", "D32"] {
        let group: FiniteGroup = spec.parse().unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(spec), &group, |b, group| {
            b.iter(|| fourier_operator(black_box(group), &BasisOrdering::default()).unwrap())
        });
    }
    g.finish();
}

fn representation_suite(c: &mut Criterion) {
    let d32 = FiniteGroup::dihedral(32).unwrap();
    c.bench_function("verify_representation_suite/D32", |b| {
        b.iter(|| verify_representation_suite(black_box(&d32)).unwrap())
    });
}

fn pipeline(c: &mut Criterion) {
    let mut g = c.benchmark_group("run_pipeline");
    for n in [4usize, 8, 16] {
        let (inst, f) = dihedral_instance(n);
        g.bench_with_input(BenchmarkId::new("dihedral", n), &(inst, f), |b, (inst, f)| {
            b.iter(|| run_pipeline(black_box(inst), f, &PipelineConfig::default()).unwrap())
        });
    }
    g.finish();
}

fn period_finding(c: &mut Criterion) {
    let mut g = c.benchmark_group("shor_pipeline");
    g.sample_size(20);
    let inst = period_instance(21, 2, 512);
    let shor = shor_transversal(512).unwrap();
    let offset = offset_transversal(512, 21, 1).unwrap();
    g.bench_function("N21_Q512_shor", |b| b.iter(|| shor_pipeline(black_box(&inst), &shor).unwrap()));
    g.bench_function("N21_Q512_offset", |b| b.iter(|| shor_pipeline(black_box(&inst), &offset).unwrap()));
    let big = period_instance(91, 3, 2048);
    let big_tau = shor_transversal(2048).unwrap();
    g.bench_function("N91_Q2048_shor", |b| b.iter(|| shor_pipeline(black_box(&big), &big_tau).unwrap()));
    g.finish();
}

criterion_group!(benches, fourier, representation_suite, pipeline, period_finding);
criterion_main!(benches);
