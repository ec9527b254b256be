use num_complex::Complex64;
use onebit_mcrb::{
    moment_matrices_awgn, moment_matrices_colored, one_bit_quantize, signal, trial_rng, MomentSet, NoiseModel,
    NoiseSampler, OrthantConfig, SteeringModel, Theta,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const N: usize = 8;

fn random_configs(count: usize, seed: u64) -> Vec<(Theta, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let phi = rng.gen_range(-1.4..1.4);
            let sigma2 = rng.gen_range(0.2..3.0);
            let snr_db: f64 = rng.gen_range(-5.0..20.0);
            let r = (sigma2 * 10f64.powf(snr_db / 10.0)).sqrt();
            (Theta::from_polar(phi, r, rng.gen_range(-3.14..3.14)), sigma2)
        })
        .collect()
}

// Real components of (μ, M, P), flattened.
fn components(mu: &[Complex64], m: impl Fn(usize, usize) -> Complex64, p: impl Fn(usize, usize) -> Complex64) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * N + 4 * N * N);
    for z in mu {
        out.extend([z.re, z.im]);
    }
    for i in 0..N {
        for l in 0..N {
            let (a, b) = (m(i, l), p(i, l));
            out.extend([a.re, a.im, b.re, b.im]);
        }
    }
    out
}

fn analytic(ms: &MomentSet) -> Vec<f64> {
    let mu: Vec<Complex64> = ms.mu.iter().copied().collect();
    components(&mu, |i, l| ms.m[(i, l)], |i, l| ms.p[(i, l)])
}

#[test]
fn awgn_moments_match_monte_carlo() {
    let model = SteeringModel::ula(N).unwrap();
    let samples = 1_000_000usize;
    for (c, (theta, sigma2)) in random_configs(10, 7).into_iter().enumerate() {
        let noise = NoiseModel::white(sigma2).unwrap();
        let exact = analytic(&moment_matrices_awgn(&model, &theta, &noise).unwrap());
        let s = signal(&model, &theta).unwrap();
        let sampler = NoiseSampler::new(&noise, N).unwrap();
        let mut rng = trial_rng(100 + c as u64, 0);
        let mut sum = vec![0.0; exact.len()];
        let mut sum_sq = vec![0.0; exact.len()];
        for _ in 0..samples {
            let z = one_bit_quantize(&(&s + sampler.sample(&mut rng))).unwrap();
            let z: Vec<Complex64> = z.as_vector().iter().copied().collect();
            let v = components(&z, |i, l| z[i] * z[l].conj(), |i, l| z[i] * z[l]);
            for (k, x) in v.into_iter().enumerate() {
                sum[k] += x;
                sum_sq[k] += x * x;
            }
        }
        let n = samples as f64;
        for k in 0..exact.len() {
            let mean = sum[k] / n;
            let se = ((sum_sq[k] / n - mean * mean).max(0.0) / n).sqrt();
            let tol = if se == 0.0 { 1e-12 } else { 4.0 * se };
            assert!(
                (mean - exact[k]).abs() <= tol,
                "config {c} component {k}: sample {mean} vs analytic {} (se {se})",
                exact[k]
            );
        }
    }
}

fn max_entry_gap(a: &MomentSet, b: &MomentSet) -> f64 {
    let m = (&a.m - &b.m).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let p = (&a.p - &b.p).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mu = (&a.mu - &b.mu).iter().map(|z| z.norm()).fold(0.0, f64::max);
    m.max(p).max(mu)
}

#[test]
fn orthant_path_reproduces_closed_form_for_white_noise() {
    let model = SteeringModel::ula(N).unwrap();
    let qmc = OrthantConfig::default();
    for (theta, sigma2) in random_configs(10, 11) {
        let noise = NoiseModel::white(sigma2).unwrap();
        let closed = moment_matrices_awgn(&model, &theta, &noise).unwrap();
        let q = moment_matrices_colored(&model, &theta, &noise, &qmc).unwrap();
        let f = moment_matrices_colored(&model, &theta, &noise, &OrthantConfig::factorized()).unwrap();
        assert!(max_entry_gap(&closed, &q) < 1e-3, "qmc gap {}", max_entry_gap(&closed, &q));
        assert!(max_entry_gap(&closed, &f) < 1e-12);
    }
}

#[test]
fn qmc_matches_factorized_for_sinc_noise() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for u in [2.0, 4.0] {
        let rate = 2500.0 * u;
        let model = SteeringModel::tone(2e-3, rate, 2500.0).unwrap();
        let noise = NoiseModel::sinc(1.0, 1250.0, rate).unwrap();
        for _ in 0..3 {
            let r = (model.len() as f64 * 10f64.powf(rng.gen_range(-5.0..15.0) / 10.0)).sqrt();
            let theta = Theta::from_polar(rng.gen_range(0.0..2500.0), r, rng.gen_range(0.0..6.28));
            let q = moment_matrices_colored(&model, &theta, &noise, &OrthantConfig::default()).unwrap();
            let f = moment_matrices_colored(&model, &theta, &noise, &OrthantConfig::factorized()).unwrap();
            let gap = max_entry_gap(&q, &f);
            assert!(gap < 1e-3, "U = {u}: gap {gap}");
        }
    }
}

#[test]
fn colored_moments_match_monte_carlo() {
    let rate = 5000.0;
    let model = SteeringModel::tone(1.4e-3, rate, 2500.0).unwrap();
    let n = model.len();
    let noise = NoiseModel::sinc(1.0, 1250.0, rate).unwrap();
    let theta = Theta::from_polar(700.0, (n as f64 * 2.0).sqrt(), 0.4);
    let exact = moment_matrices_colored(&model, &theta, &noise, &OrthantConfig::factorized()).unwrap();
    let s = signal(&model, &theta).unwrap();
    let sampler = NoiseSampler::new(&noise, n).unwrap();
    let mut rng = trial_rng(5, 0);
    let samples = 200_000;
    let mut m = nalgebra::DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for _ in 0..samples {
        let z = one_bit_quantize(&(&s + sampler.sample(&mut rng))).unwrap().into_vector();
        m += &z * z.adjoint();
    }
    m /= Complex64::from(samples as f64);
    // Each entry is a mean of bounded (|x| ≤ 2) draws.
    let tol = 4.0 * 2.0 / (samples as f64).sqrt();
    let gap = (&m - &exact.m).iter().map(|z| z.norm()).fold(0.0, f64::max);
    assert!(gap < tol, "gap {gap} vs {tol}");
}
