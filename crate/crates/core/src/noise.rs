//! True-noise covariance (white or band-limited sinc) and correlated
//! complex Gaussian sampling.
//!
//! The band-limited kernel is `[R]_{n,m} = σ²·sinc(2B·T_s·(n−m))` with
//! `T_s = 1/f_s`. Sampling at exactly `f_s = 2B` gives `σ²I`. The oversampling
//! factor reported by [`NoiseModel::oversampling`] is `f_s/(2B)`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::CVector;

/// Relative eigenvalue floor applied before factorizing a sinc covariance.
pub const EIGEN_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseKind {
    White,
    /// Ideal low-pass noise of bandwidth `bandwidth` Hz sampled at `sample_rate` Hz.
    SincBandlimited { bandwidth: f64, sample_rate: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    variance: f64,
    kind: NoiseKind,
}

impl NoiseModel {
    pub fn white(variance: f64) -> Result<Self> {
        Self::new(variance, NoiseKind::White)
    }

    pub fn sinc(variance: f64, bandwidth: f64, sample_rate: f64) -> Result<Self> {
        Self::new(variance, NoiseKind::SincBandlimited { bandwidth, sample_rate })
    }

    pub fn new(variance: f64, kind: NoiseKind) -> Result<Self> {
        if !(variance > 0.0 && variance.is_finite()) {
            return Err(Error::DegenerateNoise(format!("noise variance must be positive, got {variance}")));
        }
        if let NoiseKind::SincBandlimited { bandwidth, sample_rate } = kind {
            if !(bandwidth > 0.0 && bandwidth.is_finite() && sample_rate.is_finite()) {
                return Err(Error::InvalidInput("bandwidth and sample rate must be positive".into()));
            }
            if sample_rate < 2.0 * bandwidth {
                return Err(Error::Undersampled { bandwidth, sample_rate });
            }
        }
        Ok(Self { variance, kind })
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn kind(&self) -> NoiseKind {
        self.kind
    }

    /// Per-sample standard deviation `σ_n` (the covariance diagonal is constant).
    pub fn sample_std(&self) -> Result<f64> {
        if self.variance > 0.0 {
            Ok(self.variance.sqrt())
        } else {
            Err(Error::DegenerateNoise("zero variance".into()))
        }
    }

    /// `f_s/(2B)`, or 1 for white noise.
    pub fn oversampling(&self) -> f64 {
        match self.kind {
            NoiseKind::White => 1.0,
            NoiseKind::SincBandlimited { bandwidth, sample_rate } => sample_rate / (2.0 * bandwidth),
        }
    }

    /// True when every off-diagonal covariance entry is exactly zero.
    pub fn is_white(&self) -> bool {
        match self.kind {
            NoiseKind::White => true,
            NoiseKind::SincBandlimited { bandwidth, sample_rate } => {
                let step = 2.0 * bandwidth / sample_rate;
                step.fract() == 0.0
            }
        }
    }

    /// Correlation `ρ_{n,m}/σ²` at integer lag `n − m`.
    pub fn correlation(&self, lag: isize) -> f64 {
        match self.kind {
            NoiseKind::White => f64::from(lag == 0),
            NoiseKind::SincBandlimited { bandwidth, sample_rate } => {
                sinc(2.0 * bandwidth / sample_rate * lag as f64)
            }
        }
    }
}

/// Normalized sinc, exact zero at nonzero integers.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else if x.fract() == 0.0 {
        0.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Real symmetric Toeplitz covariance `R` of `n` consecutive noise samples.
pub fn covariance(noise: &NoiseModel, n: usize) -> Result<DMatrix<f64>> {
    if n == 0 {
        return Err(Error::InvalidInput("covariance needs at least one sample".into()));
    }
    let lags: Vec<f64> = (0..n).map(|k| noise.variance * noise.correlation(k as isize)).collect();
    Ok(DMatrix::from_fn(n, n, |i, j| lags[i.abs_diff(j)]))
}

/// Counter-based substream for one Monte Carlo trial.
///
/// The generator depends only on `(seed, trial)`, so trials can be executed
/// in any order or concurrently.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Precomputed sampler for `CN(0, R)`: real and imaginary parts are drawn
/// independently with covariance `R/2` through a symmetric square root.
#[derive(Debug, Clone)]
pub struct NoiseSampler {
    // None when R is diagonal; then every part has std `diag_std`.
    factor: Option<DMatrix<f64>>,
    diag_std: f64,
    len: usize,
}

impl NoiseSampler {
    pub fn new(noise: &NoiseModel, n: usize) -> Result<Self> {
        let diag_std = (noise.variance / 2.0).sqrt();
        if noise.is_white() {
            return Ok(Self { factor: None, diag_std, len: n });
        }
        let half = covariance(noise, n)? / 2.0;
        let eig = half.symmetric_eigen();
        let floor = EIGEN_FLOOR * noise.variance;
        if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("covariance eigendecomposition failed".into()));
        }
        let roots = eig.eigenvalues.map(|v| v.max(floor).sqrt());
        let v = &eig.eigenvectors;
        let factor = v * DMatrix::from_diagonal(&roots) * v.transpose();
        if factor.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numerical("covariance factorization produced non-finite values".into()));
        }
        Ok(Self { factor: Some(factor), diag_std, len: n })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> CVector {
        let n = self.len;
        let mut re: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let mut im: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        match &self.factor {
            None => {
                re.iter_mut().chain(im.iter_mut()).for_each(|x| *x *= self.diag_std);
            }
            Some(f) => {
                re = (f * nalgebra::DVector::from_vec(re)).data.into();
                im = (f * nalgebra::DVector::from_vec(im)).data.into();
            }
        }
        CVector::from_iterator(n, re.into_iter().zip(im).map(|(r, i)| Complex64::new(r, i)))
    }
}

/// One draw of circularly symmetric complex Gaussian noise with covariance `R`.
pub fn sample_noise<R: Rng + ?Sized>(noise: &NoiseModel, n: usize, rng: &mut R) -> Result<CVector> {
    Ok(NoiseSampler::new(noise, n)?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn white_is_identity() {
        let r = covariance(&NoiseModel::white(1.0).unwrap(), 3).unwrap();
        assert_eq!(r, DMatrix::identity(3, 3));
    }

    #[test]
    fn nyquist_sinc_is_white() {
        let noise = NoiseModel::sinc(2.0, 1250.0, 2500.0).unwrap();
        let r = covariance(&noise, 12).unwrap();
        assert_eq!(r, DMatrix::identity(12, 12) * 2.0);
        assert!(noise.is_white());
        assert_eq!(noise.oversampling(), 1.0);
    }

    #[test]
    fn sinc_lag_one() {
        let noise = NoiseModel::sinc(3.0, 2500.0, 10_000.0).unwrap();
        let r = covariance(&noise, 4).unwrap();
        assert_abs_diff_eq!(r[(0, 1)], 3.0 * 2.0 / PI, epsilon = 1e-14);
        assert_abs_diff_eq!(r[(0, 2)], 0.0, epsilon = 0.0);
        assert_eq!(r, r.transpose());
        for i in 1..4 {
            for j in 1..4 {
                assert_eq!(r[(i, j)], r[(i - 1, j - 1)]);
            }
        }
    }

    #[test]
    fn undersampling_rejected() {
        assert!(matches!(
            NoiseModel::sinc(1.0, 2500.0, 4000.0),
            Err(Error::Undersampled { .. })
        ));
        assert!(matches!(NoiseModel::white(-1.0), Err(Error::DegenerateNoise(_))));
    }

    #[test]
    fn streams_are_independent_of_order() {
        let a: f64 = trial_rng(7, 3).sample(StandardNormal);
        let _: f64 = trial_rng(7, 2).sample(StandardNormal);
        let b: f64 = trial_rng(7, 3).sample(StandardNormal);
        assert_eq!(a, b);
        let c: f64 = trial_rng(7, 4).sample(StandardNormal);
        assert_ne!(a, c);
    }

    #[test]
    fn singular_sinc_factorizes() {
        // Heavily oversampled kernel is numerically rank deficient.
        let noise = NoiseModel::sinc(1.0, 100.0, 10_000.0).unwrap();
        let s = NoiseSampler::new(&noise, 64).unwrap();
        let v = s.sample(&mut trial_rng(1, 0));
        assert!(v.iter().all(|x| x.re.is_finite() && x.im.is_finite()));
    }
}
