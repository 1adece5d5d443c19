//! The same workloads on the global rayon pool and on a one-thread pool.

use arcflow::l2::{bracket_table_check, reach, ReachSpec};
use arcflow::metric::verify_metric_axioms;
use arcflow::spaces::{GridSpec, L2Grid};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    let default = rayon::ThreadPoolBuilder::new().build().unwrap();
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    vec![("parallel", default), ("sequential", single)]
}

fn bench(c: &mut Criterion) {
    let grid = GridSpec::default();
    let mut group = c.benchmark_group("arcflow");
    group.sample_size(10);
    for (mode, pool) in pools() {
        group.bench_with_input(BenchmarkId::new("reach_n3_64", mode), &pool, |b, pool| {
            b.iter(|| pool.install(|| reach(&ReachSpec::chi01(grid, 3, vec![64])).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("metric_axioms_l2", mode), &pool, |b, pool| {
            b.iter(|| pool.install(|| verify_metric_axioms(&L2Grid::new(grid), 200, 1).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("bracket_table", mode), &pool, |b, pool| {
            b.iter(|| pool.install(|| bracket_table_check(grid).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
