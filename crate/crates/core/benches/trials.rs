use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use beepnet::collision::{choose_cd_params, run_collision_detection};
use beepnet::topology::Topology;
use beepnet::trials::{run_trials_parallel, run_trials_sequential};

fn cd_trials(c: &mut Criterion) {
    let g = Topology::clique(32);
    let params = choose_cd_params(32, 1, 0.05, 1e-3).unwrap();
    let mut active = vec![false; 32];
    active[0] = true;
    active[7] = true;
    let trial = |_: usize, seed: u64| {
        run_collision_detection(&g, &active, &params, seed)
            .unwrap()
            .codeword_clash
    };

    let mut group = c.benchmark_group("cd_trials_k32");
    group.sample_size(10);
    for trials in [64usize, 512] {
        group.bench_with_input(BenchmarkId::new("sequential", trials), &trials, |b, &t| {
            b.iter(|| black_box(run_trials_sequential(1, t, trial)))
        });
        group.bench_with_input(BenchmarkId::new("parallel", trials), &trials, |b, &t| {
            b.iter(|| black_box(run_trials_parallel(1, t, trial)))
        });
    }
    group.finish();
}

criterion_group!(benches, cd_trials);
criterion_main!(benches);
