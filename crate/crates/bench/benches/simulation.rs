use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ftag_core::random::{random_instance, RandomConfig};
use ftag_core::{run_adversary, simulate, AdversaryOptions, GreedyDispatch, Patience, SimOptions};
use std::hint::black_box;

fn random_suite(c: &mut Criterion) {
    let insts: Vec<_> = (0..20)
        .map(|seed| random_instance(seed, &RandomConfig::default()))
        .collect();
    c.bench_function("simulate/patience/20 random", |b| {
        b.iter(|| {
            for inst in &insts {
                black_box(simulate(inst, &mut Patience::default(), SimOptions::default()).unwrap());
            }
        })
    });
    c.bench_function("simulate/greedy/20 random", |b| {
        b.iter(|| {
            for inst in &insts {
                black_box(simulate(inst, &mut GreedyDispatch::new(), SimOptions::default()).unwrap());
            }
        })
    });
}

fn adversary(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_adversary");
    group.sample_size(10);
    for k in [1, 2, 3] {
        group.bench_with_input(BenchmarkId::new("greedy", k), &k, |b, &k| {
            b.iter(|| {
                black_box(run_adversary(k, &mut GreedyDispatch::new(), &AdversaryOptions::default()).unwrap())
            })
        });
    }
    group.finish();
}

criterion_group!(benches, random_suite, adversary);
criterion_main!(benches);
