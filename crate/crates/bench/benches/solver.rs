use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use tmcm::{run, IntervalProblem, MoveGraph, SolverConfig};
use tmcm_bench::{lattice, striped};

fn graph_build(c: &mut Criterion) {
    let mut group = c.benchmark_group("graph_build");
    for len in [1usize, 2, 4, 8] {
        let model = lattice(20, 8, 4, 1);
        let current = striped(&model);
        let problem = IntervalProblem::new(&model, &current, 1, len as u32).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(len), &problem, |b, p| {
            b.iter(|| MoveGraph::build(black_box(p)).unwrap())
        });
    }
    group.finish();
}

fn min_cut(c: &mut Criterion) {
    let mut group = c.benchmark_group("min_cut");
    for len in [1usize, 2, 4, 8] {
        let model = lattice(20, 8, 4, 1);
        let current = striped(&model);
        let problem = IntervalProblem::new(&model, &current, 1, len as u32).unwrap();
        let graph = MoveGraph::build(&problem).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(len), &graph, |b, g| {
            b.iter(|| black_box(g).solve().unwrap())
        });
    }
    group.finish();
}

fn full_run(c: &mut Criterion) {
    let mut group = c.benchmark_group("run");
    group.sample_size(10);
    let model = lattice(15, 8, 4, 1);
    for len in [1usize, 4] {
        let config = SolverConfig {
            interval_len: Some(len),
            ..SolverConfig::default()
        };
        group.bench_with_input(BenchmarkId::from_parameter(len), &config, |b, cfg| {
            b.iter(|| run(black_box(&model), cfg).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, graph_build, min_cut, full_run);
criterion_main!(benches);
