use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use pplab_core::buyers::{best_false_valuation, brute_force_best_response, optimal_surplus};
use pplab_core::harness::{run_sweep, ExperimentConfig, Horizons};
use pplab_core::{GameConfig, PenaltySemantics, SellerMachine};

const CAP: usize = 50_000_000;

fn dp_solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("dp");
    group.sample_size(10);
    for t in [256usize, 1024, 4096] {
        let r = (t as f64).ln().ceil() as u32;
        let seller = SellerMachine::penalized(r, PenaltySemantics::Strict, t).unwrap();
        let config = GameConfig::new(t, 0.85, 0.75).unwrap();
        group.bench_with_input(BenchmarkId::new("pfs", t), &t, |b, _| {
            b.iter(|| optimal_surplus(black_box(&seller), &config, CAP).unwrap())
        });
        let seller = SellerMachine::monotone_geometric(0.99, t).unwrap();
        group.bench_with_input(BenchmarkId::new("monotone", t), &t, |b, _| {
            b.iter(|| optimal_surplus(black_box(&seller), &config, CAP).unwrap())
        });
    }
    group.finish();
}

fn brute_force(c: &mut Criterion) {
    let mut group = c.benchmark_group("brute_force");
    for t in [8usize, 12, 16] {
        let seller = SellerMachine::penalized(2, PenaltySemantics::Strict, t).unwrap();
        let config = GameConfig::new(t, 0.8, 0.6).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(t), &t, |b, _| {
            b.iter(|| brute_force_best_response(black_box(&seller), &config).unwrap())
        });
    }
    group.finish();
}

fn grid_buyer(c: &mut Criterion) {
    let t = 10_000;
    let seller = SellerMachine::penalized(10, PenaltySemantics::Strict, t).unwrap();
    let config = GameConfig::new(t, 0.85, 0.75).unwrap();
    c.bench_function("grid_buyer/pfs/10000", |b| {
        b.iter(|| best_false_valuation(black_box(&seller), &config, 0.03).unwrap())
    });
}

fn sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    for threads in [1usize, 4] {
        let mut config = ExperimentConfig::figure(0.85, 0.75);
        config.horizons = Horizons::LogSpaced {
            from: 100,
            to: 10_000,
            points: 9,
        };
        config.threads = Some(threads);
        group.bench_with_input(BenchmarkId::new("figure", threads), &threads, |b, _| {
            b.iter(|| run_sweep(black_box(&config)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, dp_solve, brute_force, grid_buyer, sweep);
criterion_main!(benches);
