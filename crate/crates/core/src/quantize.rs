//! Complex one-bit quantizer and the exact single-sample statistics of its output.

use std::f64::consts::SQRT_2;

use num_complex::Complex64;
use libm::{erf, erfc};

use crate::error::{Error, Result};
use crate::model::{signal, CVector, SteeringModel, Theta};
use crate::noise::NoiseModel;

/// Quantized samples; every real and imaginary part is exactly `±1`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedVector(CVector);

impl QuantizedVector {
    pub fn as_vector(&self) -> &CVector {
        &self.0
    }

    pub fn into_vector(self) -> CVector {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Outcome index `k ∈ {0,1,2,3}` of each sample, `k = 2·[Re ≥ 0] + [Im ≥ 0]`.
    pub fn outcomes(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().map(|z| outcome_index(z.re >= 0.0, z.im >= 0.0))
    }
}

#[inline]
pub(crate) fn outcome_index(re_nonneg: bool, im_nonneg: bool) -> usize {
    2 * usize::from(re_nonneg) + usize::from(im_nonneg)
}

/// The quantized value for outcome index `k`.
#[inline]
pub(crate) fn outcome_value(k: usize) -> Complex64 {
    let re = if k & 2 != 0 { 1.0 } else { -1.0 };
    let im = if k & 1 != 0 { 1.0 } else { -1.0 };
    Complex64::new(re, im)
}

#[inline]
fn sign(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// `sign(Re x) + j·sign(Im x)` with `sign(0) = +1`.
pub fn one_bit_quantize(x: &CVector) -> Result<QuantizedVector> {
    if let Some(bad) = x.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::InvalidInput(format!("non-finite sample at index {bad}")));
    }
    Ok(QuantizedVector(x.map(|v| Complex64::new(sign(v.re), sign(v.im)))))
}

/// Standard normal tail probability `Q(x) = ½·erfc(x/√2)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

/// Normalized negated signal `q_n = −s_n / (σ_n/√2)`, packed as `q_R + j·q_I`.
pub fn q_vector(model: &SteeringModel, theta: &Theta, noise: &NoiseModel) -> Result<CVector> {
    let scale = noise.sample_std()? / SQRT_2;
    Ok(signal(model, theta)? / Complex64::new(-scale, 0.0))
}

/// Probabilities `(p(−1), p(+1))` of one quantized part, `p(z) = Q(z·q)`.
pub fn sample_pmf(q: f64) -> (f64, f64) {
    (q_function(-q), q_function(q))
}

/// Mean of one quantized part, `1 − 2Q(−q) = Q(q) − Q(−q)`.
#[inline]
pub(crate) fn part_mean(q: f64) -> f64 {
    -erf(q / SQRT_2)
}

/// `μ(θ) = E[z]`, computed from the true noise diagonal.
pub fn mean_vector(model: &SteeringModel, theta: &Theta, noise: &NoiseModel) -> Result<CVector> {
    let q = q_vector(model, theta, noise)?;
    Ok(q.map(|qn| Complex64::new(part_mean(qn.re), part_mean(qn.im))))
}

/// `(E|z_n|², E z_n²) = (2, 2j·μ_R·μ_I)`.
pub fn single_sample_second_moments(mu_n: Complex64) -> (f64, Complex64) {
    (2.0, Complex64::new(0.0, 2.0 * mu_n.re * mu_n.im))
}
