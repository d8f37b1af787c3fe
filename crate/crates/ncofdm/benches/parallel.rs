//! Sequential vs rayon execution of a batch of independent smoothing trials.
//! On a single-core machine the two should be within noise of each other;
//! the gap grows with `RAYON_NUM_THREADS`.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ncofdm::exec::{par_map, seq_map, trial_rng};
use ncofdm::waveform::{build_smoother, random_symbols, QamConstellation, SmootherContext, SystemConfig};

const TRIALS: usize = 64;

fn trial(ctx: &SmootherContext, qam: &QamConstellation, index: usize) -> f64 {
    let mut rng = trial_rng(1, index as u64);
    let prev = random_symbols(qam, ctx.k(), &mut rng);
    let cur = random_symbols(qam, ctx.k(), &mut rng);
    ctx.smooth(&prev, &cur).unwrap().iter().map(|w| w.norm_sqr()).sum()
}

fn smoothing(c: &mut Criterion) {
    let qam = QamConstellation::new(16).unwrap();
    let mut group = c.benchmark_group("smooth_batch");
    group.sample_size(20);
    for (n, l) in [(2, 144), (4, 1000)] {
        let ctx = build_smoother(&SystemConfig::new(n, l)).unwrap();
        let label = format!("N{n}_L{l}");
        group.bench_with_input(BenchmarkId::new("sequential", &label), &ctx, |b, ctx| {
            b.iter(|| black_box(seq_map(TRIALS, |i| trial(ctx, &qam, i))))
        });
        group.bench_with_input(BenchmarkId::new("parallel", &label), &ctx, |b, ctx| {
            b.iter(|| black_box(par_map(TRIALS, |i| trial(ctx, &qam, i))))
        });
    }
    group.finish();
}

criterion_group!(benches, smoothing);
criterion_main!(benches);
