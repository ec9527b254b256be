use criterion::{black_box, criterion_group, criterion_main, Criterion};
use onebit_mcrb::{
    evaluate, moment_matrices_colored, monte_carlo, GridEstimator, McConfig, NoiseModel, OrthantConfig, SearchConfig,
    SteeringModel, Theta,
};

fn awgn_point(c: &mut Criterion) {
    let model = SteeringModel::ula(16).unwrap();
    let noise = NoiseModel::white(1.0).unwrap();
    let theta = Theta::from_polar(0.3, 10.0, 0.5);
    let search = SearchConfig::default();
    c.bench_function("evaluate ula16 awgn", |b| {
        b.iter(|| evaluate(&model, black_box(&theta), &noise, &search, &OrthantConfig::default()).unwrap())
    });
}

fn colored_moments(c: &mut Criterion) {
    let model = SteeringModel::tone(4e-3, 5000.0, 2500.0).unwrap();
    let noise = NoiseModel::sinc(1.0, 1250.0, 5000.0).unwrap();
    let theta = Theta::from_polar(1000.0, 20.0, 1.0);
    let mut group = c.benchmark_group("colored moments n21");
    group.sample_size(10);
    group.bench_function("qmc 2^12", |b| {
        let cfg = OrthantConfig::default().with_points(1 << 12);
        b.iter(|| moment_matrices_colored(&model, black_box(&theta), &noise, &cfg).unwrap())
    });
    group.bench_function("factorized", |b| {
        b.iter(|| moment_matrices_colored(&model, black_box(&theta), &noise, &OrthantConfig::factorized()).unwrap())
    });
    group.finish();
}

fn estimators(c: &mut Criterion) {
    let model = SteeringModel::ula(64).unwrap();
    let search = SearchConfig::default();
    let est = GridEstimator::new(&model, &search).unwrap();
    let outcomes: Vec<usize> = (0..64).map(|i| (i * 5 + 1) % 4).collect();
    let samples: Vec<[f64; 2]> = (0..64).map(|i| [i as f64 * 0.1, 1.0 - i as f64 * 0.05]).collect();
    let plain = onebit_mcrb::complexity::Plain;
    c.bench_function("grid scan one-bit n64", |b| {
        b.iter(|| (0..est.grid().len()).map(|k| est.quantized_power(k, black_box(&outcomes), &plain)).sum::<f64>())
    });
    c.bench_function("grid scan fine n64", |b| {
        b.iter(|| (0..est.grid().len()).map(|k| est.fine_power(k, black_box(&samples), &plain)).sum::<f64>())
    });
}

fn monte_carlo_batch(c: &mut Criterion) {
    let model = SteeringModel::ula(16).unwrap();
    let noise = NoiseModel::white(1.0).unwrap();
    let theta = Theta::from_polar(0.0, 10.0, 0.8);
    let search = SearchConfig::default();
    let cfg = McConfig { trials: 100, ..McConfig::default() };
    let mut group = c.benchmark_group("monte carlo");
    group.sample_size(10);
    group.bench_function("100 trials ula16", |b| {
        b.iter(|| monte_carlo(&model, black_box(&theta), &noise, &search, &cfg).unwrap())
    });
    group.finish();
}

criterion_group!(benches, awgn_point, colored_moments, estimators, monte_carlo_batch);
criterion_main!(benches);
