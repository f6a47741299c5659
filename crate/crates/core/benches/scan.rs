//! Benchmarks for the delay-sweep entry points. The IDs carry no feature
//! information, so criterion baselines recorded with the default (parallel)
//! build compare directly against `--no-default-features` runs:
//!
//!   cargo bench -p delay-stability -- --save-baseline parallel
//!   cargo bench -p delay-stability --no-default-features -- --baseline parallel

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use delay_stability::{benchmarks, lmi, sdp, stability};

fn delay_scans(c: &mut Criterion) {
    let mut group = c.benchmark_group("delay_scan");
    group.sample_size(10);
    let sys = benchmarks::example1(1).unwrap();
    let opts = sdp::SolverOptions::default();
    for (label, m, nu1, lo, hi) in [
        ("ex1_m1_nu0_35_45", 1usize, 0usize, 35usize, 45usize),
        ("ex1_m1_nu1_50_58", 1, 1, 50, 58),
        ("ex1_m2_nu2_50_58", 2, 2, 50, 58),
    ] {
        let spec = lmi::LmiSpec::standard(m, nu1).unwrap();
        group.bench_function(label, |b| {
            b.iter(|| black_box(stability::max_delay(&sys, &spec, lo..=hi, &opts).unwrap()))
        });
    }
    group.finish();
}

fn lifting_scans(c: &mut Criterion) {
    let mut group = c.benchmark_group("lifting_scan");
    group.sample_size(10);
    let ex1 = benchmarks::example1(1).unwrap();
    let ex3 = benchmarks::example3(1).unwrap();
    group.bench_function("ex1_0_60", |b| {
        b.iter(|| black_box(stability::lifting_scan(&ex1, 60).unwrap()))
    });
    group.bench_function("ex3_0_58", |b| {
        b.iter(|| black_box(stability::lifting_scan(&ex3, 58).unwrap()))
    });
    group.finish();
}

fn single_solves(c: &mut Criterion) {
    let mut group = c.benchmark_group("single_certificate");
    group.sample_size(10);
    let opts = sdp::SolverOptions::default();
    for (label, sys, m, nu1) in [
        ("ex1_tau42_m1_nu0", benchmarks::example1(42).unwrap(), 1usize, 0usize),
        ("ex3_tau52_m1_nu2", benchmarks::example3(52).unwrap(), 1, 2),
    ] {
        let spec = lmi::LmiSpec::standard(m, nu1).unwrap();
        group.bench_function(label, |b| {
            b.iter(|| {
                let problem = lmi::assemble(&sys, &spec).unwrap();
                black_box(sdp::solve_feasibility(&problem, &opts).unwrap())
            })
        });
    }
    group.finish();
}

criterion_group!(benches, delay_scans, lifting_scans, single_solves);
criterion_main!(benches);
