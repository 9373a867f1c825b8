use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use hydrosample::fixtures;
use hydrosample::gft::{build_gft_operator, select_sampling_set, SelectionStrategy, DEFAULT_RANK_TOL};
use hydrosample::neural::{train_decoder_on, DecoderConfig, TrainConfig};
use hydrosample::plans::build_gft_dataset;
use hydrosample::sim::{simulate_transport, solve_flows};
use hydrosample_bench::{looped30_stacked, looped30_sweep};

fn gft(c: &mut Criterion) {
    let x = looped30_stacked();
    c.bench_function("gft_operator_looped30", |b| {
        b.iter(|| build_gft_operator(black_box(&x.values), DEFAULT_RANK_TOL).unwrap())
    });
    let op = build_gft_operator(&x.values, DEFAULT_RANK_TOL).unwrap();
    c.bench_function("greedy_selection_looped30", |b| {
        b.iter(|| select_sampling_set(black_box(&op), SelectionStrategy::Greedy).unwrap())
    });
}

fn transport(c: &mut Criterion) {
    let net = fixtures::looped30();
    let flows = solve_flows(&net).unwrap();
    let scenario = looped30_sweep().swap_remove(0).scenario;
    c.bench_function("solve_flows_looped30", |b| {
        b.iter(|| solve_flows(black_box(&net)).unwrap())
    });
    c.bench_function("transport_looped30", |b| {
        b.iter(|| simulate_transport(black_box(&net), &flows, &scenario).unwrap())
    });
}

fn training(c: &mut Criterion) {
    let xs = looped30_sweep();
    let plan = build_gft_dataset(&xs[0]).unwrap();
    let train: Vec<_> = xs.iter().collect();
    let cfg = DecoderConfig {
        hidden: None,
        train: TrainConfig {
            epochs: 10,
            ..TrainConfig::default()
        },
    };
    let mut group = c.benchmark_group("decoder");
    group.sample_size(10);
    group.bench_function("train_10_epochs_looped30", |b| {
        b.iter(|| train_decoder_on(black_box(&plan), &train, &[], &cfg).unwrap())
    });
    group.finish();
}

criterion_group!(benches, gft, transport, training);
criterion_main!(benches);
