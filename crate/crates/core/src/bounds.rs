//! Pseudo-true parameter, misspecified bound and quantized CRB.
//!
//! The assumed model ignores the quantizer: `z ~ CN(β·a(φ), σ²I)`. Its
//! expected log-likelihood under the true law of `z` is maximized at
//! `φ₀ = argmax |a(φ′)ᴴ·μ|`, `β₀ = a(φ₀)ᴴ·μ`, and the sandwich `A⁻¹BA⁻¹`
//! bounds the error covariance of estimators whose mean is `θ₀`.

use nalgebra::{DMatrix, Matrix3};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::estimators::{maximize_on_grid, SearchConfig};
use crate::model::{steering, steering_d1, steering_d2, CVector, SteeringModel, Theta};
use crate::noise::NoiseModel;
use crate::orthant::{moment_matrices, MomentSet, OrthantConfig};
use crate::quantize::{mean_vector, q_function, q_vector};

/// Relative agreement required between the closed form and `(A⁻¹BA⁻¹)₁₁`.
pub const MCRB_AGREEMENT: f64 = 1e-8;

// Negative bound numerators smaller than this fraction of the summed term
// magnitudes are rounding noise.
const ROUNDING_SCALE: f64 = 1e-10;

/// Bounds at one scenario point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    pub theta0: Theta,
    pub bias_phi: f64,
    pub mcrb11: f64,
    pub mse_bound: f64,
    /// Quantized-data CRB on `φ`; white noise only.
    pub crb: Option<f64>,
}

/// Ingredients of the sandwich bound at `θ₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McrbIntermediates {
    pub j1: f64,
    pub j2: Complex64,
    pub l1: f64,
    pub l2: Complex64,
    pub l3: Complex64,
    pub l4: f64,
    pub l5: f64,
    pub l6: f64,
    pub a: Matrix3<f64>,
    pub b: Matrix3<f64>,
    /// `(A⁻¹BA⁻¹)₁₁` from the full matrices.
    pub full_matrix_mcrb11: f64,
}

type CMatrix = DMatrix<Complex64>;

fn is_zero(v: &CVector) -> bool {
    v.iter().all(|x| x.norm_sqr() == 0.0)
}

/// Unquantized ambiguity function `a(φ′)ᴴa(φ)/(‖a(φ′)‖‖a(φ)‖)` over `grid`.
pub fn ambiguity_function(model: &SteeringModel, phi: f64, grid: &[f64]) -> Result<Vec<Complex64>> {
    let a = steering(model, phi)?;
    grid.iter()
        .map(|&p| {
            let b = steering(model, p)?;
            Ok(b.dotc(&a) / (a.norm() * b.norm()))
        })
        .collect()
}

/// Misspecified ambiguity function `a(φ′)ᴴμ(θ)`, scaled to unit peak modulus
/// over `grid`.
pub fn maf(model: &SteeringModel, theta: &Theta, noise: &NoiseModel, grid: &[f64]) -> Result<Vec<Complex64>> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("empty angle grid".into()));
    }
    let mu = mean_vector(model, theta, noise)?;
    if is_zero(&mu) {
        return Err(Error::DegenerateMaf);
    }
    let raw: Vec<Complex64> =
        grid.iter().map(|&p| Ok(steering(model, p)?.dotc(&mu))).collect::<Result<_>>()?;
    let peak = raw.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return Err(Error::DegenerateMaf);
    }
    Ok(raw.into_iter().map(|v| v / peak).collect())
}

/// `θ₀`: `φ₀` maximizes `|a(φ′)ᴴμ(θ)|` over the search grid with golden-section
/// refinement; `β₀ = a(φ₀)ᴴμ(θ)`.
pub fn pseudo_true(model: &SteeringModel, theta: &Theta, noise: &NoiseModel, search: &SearchConfig) -> Result<Theta> {
    search.validate()?;
    let mu = mean_vector(model, theta, noise)?;
    pseudo_true_from_mean(model, &mu, search)
}

pub(crate) fn pseudo_true_from_mean(model: &SteeringModel, mu: &CVector, search: &SearchConfig) -> Result<Theta> {
    if is_zero(mu) {
        return Err(Error::DegenerateMaf);
    }
    let grid = model.grid(search.grid_size);
    let objective = |p: f64| model.steering_unchecked(p).dotc(mu).norm_sqr();
    let values: Vec<f64> = grid.iter().map(|&p| objective(p)).collect();
    let phi0 = maximize_on_grid(objective, &grid, &values, model.domain(), search.refine_tolerance);
    let beta0 = model.steering_unchecked(phi0).dotc(mu);
    Ok(Theta::new(phi0, beta0))
}

/// `φ₀ − φ`.
pub fn bias_phi(model: &SteeringModel, theta: &Theta, noise: &NoiseModel, search: &SearchConfig) -> Result<f64> {
    Ok(pseudo_true(model, theta, noise, search)?.phi - theta.phi)
}

// Cov[Re(gᴴz), Re(hᴴz)] from the centered second moments.
fn real_part_covariance(g: &CVector, h: &CVector, mc: &CMatrix, pc: &CMatrix) -> f64 {
    0.5 * (g.dotc(&(mc * h)).re + g.dotc(&(pc * h.conjugate())).re)
}

/// Misspecified CRB on `φ`.
///
/// `moments` must be evaluated at the true parameter and `theta0` must be the
/// corresponding pseudo-true parameter. `assumed_variance` is the noise
/// variance of the assumed model; it scales `A` and `B` but cancels in the
/// bound. Returns the intermediates and `[MCRB]₁₁`.
pub fn mcrb(
    model: &SteeringModel,
    moments: &MomentSet,
    theta0: &Theta,
    assumed_variance: f64,
) -> Result<(McrbIntermediates, f64)> {
    if !(assumed_variance > 0.0 && assumed_variance.is_finite()) {
        return Err(Error::DegenerateNoise("assumed variance must be positive".into()));
    }
    let n = model.len();
    if moments.mu.len() != n || moments.m.nrows() != n || moments.p.nrows() != n {
        return Err(Error::InvalidInput("moment dimensions do not match the model".into()));
    }
    let mu = &moments.mu;
    // Centered moments; the μ-parts of every L term reduce to closed
    // expressions in β₀ = a(φ₀)ᴴμ and J₂, which avoids cancelling O(|β₀|²)
    // terms at high SNR.
    let mc = &moments.m - mu * mu.adjoint();
    let pc = &moments.p - mu * mu.transpose();
    let a = steering(model, theta0.phi)?;
    let ad = steering_d1(model, theta0.phi)?;
    let add = steering_d2(model, theta0.phi)?;
    let b0 = theta0.beta;

    let j1 = (mu.dotc(&add) * b0).re;
    let j2 = ad.dotc(mu);
    let ama = a.dotc(&(&mc * &a)).re;
    let l1 = (b0 * b0 * ad.dot(&(pc.conjugate() * &ad))).re
        + b0.norm_sqr() * ad.dotc(&(&mc * &ad)).re
        + 2.0 * (b0 * j2.conj()).re.powi(2);
    let l2 = b0.conj() * ad.dotc(&(&pc * a.conjugate())) + b0 * a.dotc(&(&mc * &ad));
    let l3c = a.dotc(&(&pc * a.conjugate()));
    let l3 = l3c + b0 * b0;
    let l4 = l3c.im;
    let l5 = l3c.re + ama;
    let l6 = -l3c.re + ama;

    let det = j1 + j2.norm_sqr();
    let det_scale = j1.abs() + j2.norm_sqr();
    if !det.is_finite() || det.abs() <= 1e-14 * det_scale || det_scale == 0.0 {
        return Err(Error::Singular("A"));
    }
    let terms = [
        l1,
        2.0 * (j2 * l2.conj()).re,
        l6 * j2.im * j2.im,
        l5 * j2.re * j2.re,
        2.0 * l4 * j2.im * j2.re,
    ];
    let mut numerator: f64 = terms.iter().sum();
    let magnitude: f64 = terms.iter().map(|t| t.abs()).sum();
    if !numerator.is_finite() {
        return Err(Error::Numerical("non-finite bound numerator".into()));
    }
    if numerator < 0.0 {
        if -numerator > ROUNDING_SCALE * magnitude {
            return Err(Error::Numerical(format!(
                "negative bound numerator {numerator:e} (term scale {magnitude:e})"
            )));
        }
        numerator = 0.0;
    }
    let closed = numerator / (2.0 * det * det);

    // Full sandwich, assembled from the score and Hessian moments directly.
    let var = assumed_variance;
    let g = [ad.map(|v| v * b0), a.clone(), a.map(|v| v * Complex64::i())];
    let c = [0.0, b0.re, b0.im];
    let offsets: Vec<f64> = g.iter().zip(c).map(|(gk, ck)| gk.dotc(mu).re - ck).collect();
    let b_tilde = Matrix3::from_fn(|k, l| {
        real_part_covariance(&g[k], &g[l], &mc, &pc) + offsets[k] * offsets[l]
    });
    let b_tilde = (b_tilde + b_tilde.transpose()) * 0.5;
    let h1 = add.map(|v| v * b0).dotc(mu).re;
    let h2 = ad.dotc(mu);
    #[rustfmt::skip]
    let a_tilde = Matrix3::new(
        h1,    h2.re, h2.im,
        h2.re, -1.0,  0.0,
        h2.im, 0.0,   -1.0,
    );
    let a_mat = a_tilde * (2.0 / var);
    let b_mat = b_tilde * (4.0 / (var * var));
    let a_inv = a_mat.try_inverse().ok_or(Error::Singular("A"))?;
    let full = (a_inv * b_mat * a_inv)[(0, 0)];
    if !full.is_finite() {
        return Err(Error::Numerical("non-finite sandwich bound".into()));
    }
    let scale = closed.abs().max(full.abs()).max(ROUNDING_SCALE * magnitude / (2.0 * det * det));
    if (closed - full).abs() > MCRB_AGREEMENT * scale {
        return Err(Error::Numerical(format!(
            "closed-form bound {closed:e} disagrees with full sandwich {full:e} (term scale {:e})",
            magnitude / (2.0 * det * det)
        )));
    }
    let inter = McrbIntermediates {
        j1,
        j2,
        l1,
        l2,
        l3,
        l4,
        l5,
        l6,
        a: a_mat,
        b: b_mat,
        full_matrix_mcrb11: full,
    };
    Ok((inter, closed))
}

/// `[MCRB]₁₁ + b₁²`.
pub fn mse_bound(mcrb11: f64, bias: f64) -> f64 {
    mcrb11 + bias * bias
}

/// `ψ(q) = exp(−q²)/(σ²π·Q(q)·Q(−q))`.
pub fn psi(q: f64, variance: f64) -> f64 {
    let num = (-q * q).exp();
    if num == 0.0 {
        return 0.0;
    }
    num / (variance * std::f64::consts::PI * q_function(q) * q_function(-q))
}

/// CRB on `φ` of the correctly specified one-bit model in white noise.
pub fn quantized_crb(model: &SteeringModel, theta: &Theta, noise: &NoiseModel) -> Result<f64> {
    if !noise.is_white() {
        return Err(Error::Misuse("quantized CRB is defined for white noise only".into()));
    }
    let q = q_vector(model, theta, noise)?;
    let a = steering(model, theta.phi)?;
    let ad = steering_d1(model, theta.phi)?;
    let var = noise.variance();
    let mut fim = Matrix3::<f64>::zeros();
    for n in 0..a.len() {
        let ds = theta.beta * ad[n];
        let g_re = nalgebra::Vector3::new(ds.re, a[n].re, -a[n].im);
        let g_im = nalgebra::Vector3::new(ds.im, a[n].im, a[n].re);
        fim += g_re * g_re.transpose() * psi(q[n].re, var);
        fim += g_im * g_im.transpose() * psi(q[n].im, var);
    }
    let chol = fim.cholesky().ok_or(Error::Singular("Fisher information"))?;
    let inv = chol.inverse();
    let crb = inv[(0, 0)];
    if !(crb.is_finite() && crb > 0.0) {
        return Err(Error::Singular("Fisher information"));
    }
    Ok(crb)
}

/// Pseudo-true parameter, bias, MCRB, MSE bound and (white noise) CRB at one
/// scenario point. The assumed-model variance is the true per-sample variance.
pub fn evaluate(
    model: &SteeringModel,
    theta: &Theta,
    noise: &NoiseModel,
    search: &SearchConfig,
    orthant: &OrthantConfig,
) -> Result<BoundReport> {
    search.validate()?;
    let moments = moment_matrices(model, theta, noise, orthant)?;
    let theta0 = pseudo_true_from_mean(model, &moments.mu, search)?;
    let (_, mcrb11) = mcrb(model, &moments, &theta0, noise.variance())?;
    let bias = theta0.phi - theta.phi;
    let crb = if noise.is_white() {
        match quantized_crb(model, theta, noise) {
            Ok(v) => Some(v),
            // Every sample saturated: no Fisher information, unbounded CRB.
            Err(Error::Singular(_)) => Some(f64::INFINITY),
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    Ok(BoundReport { theta0, bias_phi: bias, mcrb11, mse_bound: mse_bound(mcrb11, bias), crb })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orthant::moment_matrices_awgn;
    use std::f64::consts::PI;

    fn ula_point(phi: f64, snr_db: f64, phase: f64) -> (SteeringModel, Theta, NoiseModel) {
        let model = SteeringModel::ula(16).unwrap();
        let modulus = 10f64.powf(snr_db / 20.0);
        (model, Theta::from_polar(phi, modulus, phase), NoiseModel::white(1.0).unwrap())
    }

    #[test]
    fn af_peaks_at_truth() {
        let model = SteeringModel::ula(16).unwrap();
        let grid = model.grid(201);
        let af = ambiguity_function(&model, grid[120], &grid).unwrap();
        let best = af.iter().enumerate().max_by(|x, y| x.1.norm().total_cmp(&y.1.norm())).unwrap();
        assert_eq!(best.0, 120);
        assert!((best.1.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn maf_normalized_and_degenerate() {
        let (model, theta, noise) = ula_point(0.3, 30.0, 0.0);
        let grid = model.grid(301);
        let v = maf(&model, &theta, &noise, &grid).unwrap();
        let peak = v.iter().map(|x| x.norm()).fold(0.0, f64::max);
        assert!((peak - 1.0).abs() < 1e-15);
        let zero = Theta::new(0.3, Complex64::new(0.0, 0.0));
        assert!(matches!(maf(&model, &zero, &noise, &grid), Err(Error::DegenerateMaf)));
        assert!(matches!(pseudo_true(&model, &zero, &noise, &SearchConfig::default()), Err(Error::DegenerateMaf)));
    }

    #[test]
    fn low_snr_maf_follows_af() {
        let (model, theta, noise) = ula_point(0.4, -30.0, 0.3);
        let grid = model.grid(401);
        let m: Vec<f64> = maf(&model, &theta, &noise, &grid).unwrap().iter().map(|v| v.norm()).collect();
        let a: Vec<f64> = ambiguity_function(&model, 0.4, &grid).unwrap().iter().map(|v| v.norm()).collect();
        let mean = |x: &[f64]| x.iter().sum::<f64>() / x.len() as f64;
        let (mm, ma) = (mean(&m), mean(&a));
        let cov: f64 = m.iter().zip(&a).map(|(x, y)| (x - mm) * (y - ma)).sum();
        let vm: f64 = m.iter().map(|x| (x - mm).powi(2)).sum();
        let va: f64 = a.iter().map(|y| (y - ma).powi(2)).sum();
        assert!(cov / (vm * va).sqrt() > 0.999);
        let b = bias_phi(&model, &theta, &noise, &SearchConfig::default()).unwrap();
        assert!(b.abs() < 1e-4);
    }

    #[test]
    fn symmetric_point_has_no_bias() {
        let (model, theta, noise) = ula_point(0.0, 30.0, PI / 4.0);
        let b = bias_phi(&model, &theta, &noise, &SearchConfig::default()).unwrap();
        assert!(b.abs() < 1e-7, "{b}");
    }

    #[test]
    fn closed_form_matches_sandwich() {
        for (phi, snr, phase) in [(0.0, 10.0, 0.2), (0.3, 25.0, 0.9), (-0.8, 0.0, 2.0), (0.5, 35.0, 0.0)] {
            let (model, theta, noise) = ula_point(phi, snr, phase);
            let mo = moment_matrices_awgn(&model, &theta, &noise).unwrap();
            let t0 = pseudo_true(&model, &theta, &noise, &SearchConfig::default()).unwrap();
            let (inter, v) = mcrb(&model, &mo, &t0, 1.0).unwrap();
            assert!(v > 0.0);
            assert!((v - inter.full_matrix_mcrb11).abs() <= 1e-8 * v);
            assert_eq!(inter.a[(1, 1)], -2.0);
            assert_eq!(inter.a[(2, 2)], -2.0);
            assert_eq!(inter.a[(1, 2)], 0.0);
            assert!((inter.b - inter.b.transpose()).abs().max() == 0.0);
            let (_, scaled) = mcrb(&model, &mo, &t0, 10.0).unwrap();
            assert!((scaled - v).abs() <= 1e-12 * v);
        }
    }

    #[test]
    fn psi_at_zero() {
        assert!((psi(0.0, 2.0) - 4.0 / (2.0 * PI)).abs() < 1e-15);
        assert_eq!(psi(40.0, 1.0), 0.0);
        assert!(psi(5.0, 1.0) > 0.0);
    }

    #[test]
    fn crb_requirements() {
        let (model, theta, noise) = ula_point(0.1, 10.0, 0.4);
        assert!(quantized_crb(&model, &theta, &noise).unwrap() > 0.0);
        let zero = Theta::new(0.1, Complex64::new(0.0, 0.0));
        assert!(matches!(quantized_crb(&model, &zero, &noise), Err(Error::Singular(_))));
        let sinc = NoiseModel::sinc(1.0, 1.0, 4.0).unwrap();
        assert!(matches!(quantized_crb(&model, &theta, &sinc), Err(Error::Misuse(_))));
    }

    #[test]
    fn report_is_consistent() {
        let (model, theta, noise) = ula_point(0.2, 20.0, 0.7);
        let r = evaluate(&model, &theta, &noise, &SearchConfig::default(), &OrthantConfig::default()).unwrap();
        assert_eq!(r.mse_bound, r.mcrb11 + r.bias_phi * r.bias_phi);
        assert!(r.crb.unwrap() > 0.0);
        assert_eq!(mse_bound(1e-6, 1e-3), 1e-6 + 1e-6);
        assert_eq!(mse_bound(0.0, 0.0), 0.0);
    }
}
