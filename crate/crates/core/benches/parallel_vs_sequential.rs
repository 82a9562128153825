use std::hint::black_box;

use canodual::benchmarks::{self, BenchmarkName};
use canodual::cli::{grid_csv, table_rows, Surface, TableSolveArgs};
use canodual::Execution;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MODES: [Execution; 2] = [Execution::Sequential, Execution::Parallel];

fn label(e: Execution) -> &'static str {
    match e {
        Execution::Sequential => "sequential",
        Execution::Parallel => "parallel",
    }
}

fn table(c: &mut Criterion) {
    let args = TableSolveArgs { strategy: "s4".into(), sigma0: None, translate: None, penalty: None, max_iter: None };
    let dims = [20, 50, 100, 200];
    let mut g = c.benchmark_group("rosenbrock_table");
    g.sample_size(10);
    for e in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(label(e)), &e, |b, &e| {
            b.iter(|| table_rows(BenchmarkName::Rosenbrock, black_box(&dims), &args, 0, e))
        });
    }
    g.finish();
}

fn dual_grid(c: &mut Criterion) {
    let p = benchmarks::styblinski_tang().unwrap();
    let mut g = c.benchmark_group("styblinski_tang_dual_grid");
    for e in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(label(e)), &e, |b, &e| {
            b.iter(|| grid_csv(&p, Surface::Dual, &[(8.0, 12.0), (8.0, 12.0)], black_box(101), e).unwrap())
        });
    }
    g.finish();
}

fn primal_batch(c: &mut Criterion) {
    let p = benchmarks::rosenbrock(100).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let points: Vec<DVector<f64>> = (0..2000).map(|_| DVector::from_fn(100, |_, _| rng.random_range(-2.0..2.0))).collect();
    let mut g = c.benchmark_group("rosenbrock100_primal_batch");
    for e in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(label(e)), &e, |b, &e| {
            b.iter(|| e.map(black_box(&points), |x| p.eval_primal(x).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, table, dual_grid, primal_batch);
criterion_main!(benches);
