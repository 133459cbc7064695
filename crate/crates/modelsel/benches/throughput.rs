//! Parallel-versus-sequential throughput of the Monte Carlo core.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use modelsel::dgp::DgpParams;
use modelsel::evaluate::{full_strategy_set, run_cell};
use modelsel::exec;
use modelsel::taxonomy::TrendKnowledge;

fn level_relation_theta() -> DgpParams {
    let mut theta = DgpParams::zeros();
    theta.b[0] = 1.0;
    theta.b[2] = -1.0;
    theta.b[5] = 1.0;
    theta.m1 = 1.0;
    theta.m3 = 0.5;
    theta
}

/// One cell, all eleven strategies. The `parallel` feature routes the
/// replication blocks through rayon; `map_indexed_seq` is the base line.
fn bench_run_cell(c: &mut Criterion) {
    let theta = level_relation_theta();
    let strategies = full_strategy_set();
    let mut group = c.benchmark_group("run_cell");
    group.sample_size(10);
    for reps in [100u32, 400] {
        group.bench_with_input(BenchmarkId::new("parallel_blocks", reps), &reps, |b, &reps| {
            b.iter(|| {
                run_cell(&theta, &strategies, reps, 7, 0, TrendKnowledge::NoneKnownAbsent).unwrap()
            })
        });
    }
    group.finish();
}

/// The raw map primitive, to show the dispatch overhead floor.
fn bench_map(c: &mut Criterion) {
    let theta = level_relation_theta();
    let mut group = c.benchmark_group("simulate_map");
    group.sample_size(10);
    let n = 512usize;
    group.bench_function("parallel", |b| {
        b.iter(|| {
            exec::map_indexed(n, |i| {
                modelsel::dgp::simulate_substream(&theta, 3, 0, i as u64, 50, 100)
                    .unwrap()
                    .y[120]
            })
        })
    });
    group.bench_function("sequential", |b| {
        b.iter(|| {
            exec::map_indexed_seq(n, |i| {
                modelsel::dgp::simulate_substream(&theta, 3, 0, i as u64, 50, 100)
                    .unwrap()
                    .y[120]
            })
        })
    });
    group.finish();
}

criterion_group!(benches, bench_run_cell, bench_map);
criterion_main!(benches);
