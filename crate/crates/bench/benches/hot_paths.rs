use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use shopxai::eda::smooth_trend;
use shopxai::mdp::{run_episode, Heuristic, RewardConfig, OBS_DIM};
use shopxai::policy::Activation;
use shopxai::scenario::primary_week;
use shopxai::xattr::{deep_shap, BackgroundSet};
use shopxai::{PolicyNetwork, NUM_PRODUCTS};

fn network() -> PolicyNetwork {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    PolicyNetwork::random(&[OBS_DIM, 64, 64, NUM_PRODUCTS], Activation::Tanh, &mut rng).unwrap()
}

fn random_trace() -> shopxai::TraceDataset {
    let week = primary_week();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    run_episode(&week, &RewardConfig::default(), |o| Ok(Heuristic::Random.choose(o, &mut rng))).unwrap().trace
}

fn bench_episode(c: &mut Criterion) {
    let week = primary_week();
    let reward = RewardConfig::default();
    c.bench_function("episode_random_w01", |b| {
        b.iter(|| {
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            run_episode(black_box(&week), &reward, |o| Ok(Heuristic::Random.choose(o, &mut rng))).unwrap()
        })
    });
}

fn bench_network(c: &mut Criterion) {
    let net = network();
    let x: Vec<f64> = (0..OBS_DIM).map(|i| (i as f64 * 0.37).sin()).collect();
    c.bench_function("forward_33_64_64_8", |b| b.iter(|| net.forward(black_box(&x)).unwrap()));
    c.bench_function("grad_input_33_64_64_8", |b| b.iter(|| net.grad_input(black_box(&x), 3).unwrap()));
}

fn bench_deep_shap(c: &mut Criterion) {
    let net = network();
    let trace = random_trace();
    let bg = BackgroundSet::from_trace(&trace).unwrap();
    let x = trace.rows[trace.len() / 2].observation;
    c.bench_function("deep_shap_one_instance", |b| b.iter(|| deep_shap(&net, black_box(x.as_slice()), &bg, 4).unwrap()));
}

fn bench_lowess(c: &mut Criterion) {
    let series: Vec<f64> = (0..1000).map(|i| (i as f64 / 40.0).sin() + (i % 7) as f64 * 0.1).collect();
    c.bench_function("lowess_1000", |b| b.iter(|| smooth_trend(black_box(&series), 0.66).unwrap()));
}

criterion_group!(benches, bench_episode, bench_network, bench_deep_shap, bench_lowess);
criterion_main!(benches);
