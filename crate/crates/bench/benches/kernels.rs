use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statewarp::reservoir::series_to_states;
use statewarp::{build_crj, dsw_distance, dtw, dtw_cost, CrjParams, DswModel, TimeSeries};

fn random_series(len: usize, seed: u64) -> TimeSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    TimeSeries::univariate((0..len).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

fn dtw_kernel(c: &mut Criterion) {
    let mut g = c.benchmark_group("dtw_cost");
    for len in [100, 400] {
        let (a, b) = (random_series(len, 1), random_series(len, 2));
        g.bench_with_input(BenchmarkId::new("full", len), &len, |bch, _| {
            bch.iter(|| dtw_cost(black_box(&a), black_box(&b), None).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("band_10pct", len), &len, |bch, _| {
            bch.iter(|| dtw_cost(black_box(&a), black_box(&b), Some(len / 10)).unwrap())
        });
    }
    g.finish();
    let (a, b) = (random_series(200, 3), random_series(200, 4));
    c.bench_function("dtw_with_path/200", |bch| bch.iter(|| dtw(black_box(&a), black_box(&b), None).unwrap()));
}

fn dsw_kernel(c: &mut Criterion) {
    let model = DswModel::from_params(&CrjParams::default()).unwrap();
    let (a, b) = (random_series(150, 5), random_series(150, 6));
    c.bench_function("dsw_distance/150", |bch| {
        bch.iter(|| dsw_distance(black_box(&a), black_box(&b), &model).unwrap())
    });
}

fn states_kernel(c: &mut Criterion) {
    let mut g = c.benchmark_group("series_to_states");
    let x = random_series(1000, 7);
    for size in [5, 50] {
        let net = build_crj(&CrjParams {
            reservoir_size: size,
            ..CrjParams::default()
        })
        .unwrap();
        g.bench_with_input(BenchmarkId::new("reservoir", size), &size, |bch, _| {
            bch.iter(|| series_to_states(&net, black_box(&x)).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, dtw_kernel, dsw_kernel, states_kernel);
criterion_main!(benches);
