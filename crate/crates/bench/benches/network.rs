use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use gridgame_core::netmodel::{power_flow, serve_loads};
use gridgame_core::resilience::build_payoff_matrix;
use gridgame_core::scenario::{catalog_default, evaluate_pair};
use gridgame_core::{AhpWeights, NetworkState};

fn network(c: &mut Criterion) {
    let net = NetworkState::ieee33();
    let cat = catalog_default();
    let w = AhpWeights::default();
    c.bench_function("power_flow/ieee33", |b| b.iter(|| power_flow(black_box(&net)).unwrap()));
    let sol = power_flow(&net).unwrap();
    c.bench_function("serve_loads/ieee33", |b| b.iter(|| serve_loads(black_box(&net), black_box(&sol))));
    c.bench_function("evaluate_pair/A2-D3", |b| {
        b.iter(|| evaluate_pair(black_box(&net), &cat.attacks[1], &cat.defenses[2]).unwrap())
    });
    let mut group = c.benchmark_group("payoff");
    group.sample_size(20);
    group.bench_function("build_10x10", |b| b.iter(|| build_payoff_matrix(black_box(&net), &cat, &w).unwrap()));
    group.finish();
}

criterion_group!(benches, network);
criterion_main!(benches);
