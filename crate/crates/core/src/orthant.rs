//! Second-order statistics of the quantized vector.
//!
//! `M = E[zzᴴ]` and `P = E[zzᵀ]` need, for each pair of samples `(i, l)`,
//! the joint PMF of `(z_i, z_l)`: sixteen orthant probabilities of the
//! Gaussian vector `[x_iR, x_iI, x_lR, x_lI]`. White noise makes the pair
//! independent and the moments close in `μ`; band-limited noise couples the
//! pair through `ρ_{i,l}` and the probabilities are integrated numerically.

use nalgebra::{DMatrix, Matrix4, Vector4};
use num_complex::Complex64;
use rayon::prelude::*;
use statrs::function::erf::erfc_inv;

use crate::bvn::bvn_upper;
use crate::error::{Error, Result};
use crate::model::{signal, CVector, SteeringModel, Theta};
use crate::noise::NoiseModel;
use crate::quantize::{mean_vector, outcome_index, outcome_value, q_function, single_sample_second_moments};
use crate::sobol::Sobol;

/// Joint PMF of a sample pair, indexed `[k_i][k_l]` with
/// `k = 2·[Re ≥ 0] + [Im ≥ 0]`.
pub type PairPmf = [[f64; 4]; 4];

/// Moments of the quantized vector at the true parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSet {
    pub mu: CVector,
    pub m: DMatrix<Complex64>,
    pub p: DMatrix<Complex64>,
}

/// Gaussian law of `[x_iR, x_iI, x_lR, x_lI]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairwiseGaussian {
    pub mean: Vector4<f64>,
    pub cov: Matrix4<f64>,
}

impl PairwiseGaussian {
    /// Pair law for circular complex noise with variances `σ_i²`, `σ_l²` and
    /// real cross-covariance `ρ`.
    pub fn for_pair(s_i: Complex64, s_l: Complex64, var_i: f64, var_l: f64, rho: f64) -> Result<Self> {
        if !(var_i > 0.0 && var_l > 0.0) {
            return Err(Error::DegenerateNoise("pair variance must be positive".into()));
        }
        if rho.abs() >= (var_i * var_l).sqrt() {
            return Err(Error::Numerical(format!(
                "pair covariance not positive definite (|ρ| = {} ≥ σ_iσ_l)",
                rho.abs()
            )));
        }
        let mean = Vector4::new(s_i.re, s_i.im, s_l.re, s_l.im);
        #[rustfmt::skip]
        let cov = Matrix4::new(
            var_i, 0.0,   rho,   0.0,
            0.0,   var_i, 0.0,   rho,
            rho,   0.0,   var_l, 0.0,
            0.0,   rho,   0.0,   var_l,
        ) / 2.0;
        Ok(Self { mean, cov })
    }

    // (τ_i, τ_l, r) when the covariance has the decoupled real/imaginary pattern.
    fn decoupled(&self) -> Option<(f64, f64, f64)> {
        let c = &self.cov;
        let zero = [(0, 1), (0, 3), (1, 2), (2, 3)];
        let ok = zero.iter().all(|&(a, b)| c[(a, b)] == 0.0 && c[(b, a)] == 0.0)
            && c[(0, 0)] == c[(1, 1)]
            && c[(2, 2)] == c[(3, 3)]
            && c[(0, 2)] == c[(1, 3)]
            && c[(0, 2)] == c[(2, 0)];
        ok.then(|| {
            let (ti, tl) = (c[(0, 0)].sqrt(), c[(2, 2)].sqrt());
            (ti, tl, c[(0, 2)] / (ti * tl))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OrthantMethod {
    /// Quasi-Monte Carlo over the four-dimensional Gaussian.
    #[default]
    Qmc,
    /// Product of two bivariate orthant probabilities (valid for the
    /// decoupled real/imaginary covariance pattern).
    Factorized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrthantConfig {
    pub method: OrthantMethod,
    /// Number of QMC points; rounded up to a power of two.
    pub points: usize,
    pub seed: u64,
}

impl Default for OrthantConfig {
    fn default() -> Self {
        Self { method: OrthantMethod::Qmc, points: 1 << 16, seed: 0x5eed_0b17 }
    }
}

impl OrthantConfig {
    pub fn factorized() -> Self {
        Self { method: OrthantMethod::Factorized, ..Self::default() }
    }

    pub fn with_points(mut self, points: usize) -> Self {
        self.points = points;
        self
    }
}

/// Standard normal QMC nodes in two dimensions, shared across all pairs.
#[derive(Debug, Clone)]
pub struct QmcNodes {
    nodes: Vec<[f64; 2]>,
}

impl QmcNodes {
    pub fn new(points: usize, seed: u64) -> Self {
        let n = points.max(1).next_power_of_two();
        let mut seq = Sobol::scrambled(2, seed);
        let mut u = [0.0; 2];
        let nodes = (0..n)
            .map(|_| {
                seq.next_into(&mut u);
                u.map(norm_ppf)
            })
            .collect();
        Self { nodes }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

fn norm_ppf(p: f64) -> f64 {
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p)
}

/// Sixteen orthant probabilities of the pair, renormalized to sum to one.
pub fn pair_orthant_probs(pg: &PairwiseGaussian, cfg: &OrthantConfig) -> Result<PairPmf> {
    match cfg.method {
        OrthantMethod::Factorized => pair_orthant_probs_factorized(pg),
        OrthantMethod::Qmc => pair_orthant_probs_qmc(pg, &QmcNodes::new(cfg.points, cfg.seed)),
    }
}

/// QMC estimate over the first sample; the second sample is integrated in
/// closed form given the first.
pub fn pair_orthant_probs_qmc(pg: &PairwiseGaussian, nodes: &QmcNodes) -> Result<PairPmf> {
    let chol = pg
        .cov
        .cholesky()
        .ok_or_else(|| Error::Numerical("pair covariance is not positive definite".into()))?;
    let l = chol.l();
    let u = pg.mean;
    // Conditional law of (x₂, x₃) given (x₀, x₁).
    let s2 = l[(2, 2)];
    let s3 = l[(3, 2)].hypot(l[(3, 3)]);
    let r = l[(3, 2)] / s3;
    let mut acc = [[0.0f64; 4]; 4];
    for z in &nodes.nodes {
        let x0 = u[0] + l[(0, 0)] * z[0];
        let x1 = u[1] + l[(1, 0)] * z[0] + l[(1, 1)] * z[1];
        let m2 = u[2] + l[(2, 0)] * z[0] + l[(2, 1)] * z[1];
        let m3 = u[3] + l[(3, 0)] * z[0] + l[(3, 1)] * z[1];
        let cells = if r == 0.0 {
            let (p2, p3) = (q_function(-m2 / s2), q_function(-m3 / s3));
            [(1.0 - p2) * (1.0 - p3), (1.0 - p2) * p3, p2 * (1.0 - p3), p2 * p3]
        } else {
            bivariate_cells(-m2 / s2, -m3 / s3, r)
        };
        let row = &mut acc[outcome_index(x0 >= 0.0, x1 >= 0.0)];
        for (a, c) in row.iter_mut().zip(cells) {
            *a += c;
        }
    }
    normalize(acc)
}

fn normalize(mut pmf: PairPmf) -> Result<PairPmf> {
    let total: f64 = pmf.iter().flatten().sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::Numerical("orthant probabilities do not sum to a positive value".into()));
    }
    pmf.iter_mut().flatten().for_each(|p| *p = (*p / total).max(0.0));
    Ok(pmf)
}

// P(a·X ≥ ·, b·Y ≥ ·) for the four sign patterns of a standardized bivariate
// pair with thresholds h, k: index 2·[X part ≥ 0] + [Y part ≥ 0].
fn bivariate_cells(h: f64, k: f64, r: f64) -> [f64; 4] {
    let both = bvn_upper(h, k, r);
    let qh = q_function(h);
    let qk = q_function(k);
    let only_x = (qh - both).max(0.0);
    let only_y = (qk - both).max(0.0);
    let neither = (1.0 - both - only_x - only_y).max(0.0);
    [neither, only_y, only_x, both]
}

/// Exact factorization `P = P_real · P_imag` for the decoupled covariance.
pub fn pair_orthant_probs_factorized(pg: &PairwiseGaussian) -> Result<PairPmf> {
    let (ti, tl, r) = pg.decoupled().ok_or_else(|| {
        Error::Misuse("factorized orthant path requires decoupled real/imaginary covariance".into())
    })?;
    if !(ti > 0.0 && tl > 0.0) || r.abs() >= 1.0 {
        return Err(Error::Numerical("pair covariance is not positive definite".into()));
    }
    let u = pg.mean;
    // x ≥ 0  ⇔  standardized ≥ −u/τ.
    let re = bivariate_cells(-u[0] / ti, -u[2] / tl, r);
    let im = bivariate_cells(-u[1] / ti, -u[3] / tl, r);
    let mut pmf = [[0.0; 4]; 4];
    for (ki, row) in pmf.iter_mut().enumerate() {
        for (kl, p) in row.iter_mut().enumerate() {
            // Split k into (real bit, imaginary bit) for each sample.
            let re_cell = 2 * (ki >> 1) + (kl >> 1);
            let im_cell = 2 * (ki & 1) + (kl & 1);
            *p = re[re_cell] * im[im_cell];
        }
    }
    normalize(pmf)
}

fn pair_moments(pmf: &PairPmf) -> (Complex64, Complex64) {
    let mut m = Complex64::new(0.0, 0.0);
    let mut p = Complex64::new(0.0, 0.0);
    for (ki, row) in pmf.iter().enumerate() {
        let zi = outcome_value(ki);
        for (kl, &prob) in row.iter().enumerate() {
            let zl = outcome_value(kl);
            m += zi * zl.conj() * prob;
            p += zi * zl * prob;
        }
    }
    (m, p)
}

fn fill_diagonals(mu: &CVector, m: &mut DMatrix<Complex64>, p: &mut DMatrix<Complex64>) {
    for (i, &mi) in mu.iter().enumerate() {
        let (abs2, sq) = single_sample_second_moments(mi);
        m[(i, i)] = Complex64::new(abs2, 0.0);
        p[(i, i)] = sq;
    }
}

/// `M`, `P` from pairwise orthant probabilities; valid for any real noise
/// covariance with constant diagonal.
pub fn moment_matrices_colored(
    model: &SteeringModel,
    theta: &Theta,
    noise: &NoiseModel,
    cfg: &OrthantConfig,
) -> Result<MomentSet> {
    let s = signal(model, theta)?;
    let mu = mean_vector(model, theta, noise)?;
    let n = s.len();
    let var = noise.variance();
    let nodes = match cfg.method {
        OrthantMethod::Qmc => Some(QmcNodes::new(cfg.points, cfg.seed)),
        OrthantMethod::Factorized => None,
    };
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |l| (i, l))).collect();
    let entries = pairs
        .par_iter()
        .map(|&(i, l)| {
            let rho = var * noise.correlation((l - i) as isize);
            let pg = PairwiseGaussian::for_pair(s[i], s[l], var, var, rho)?;
            let pmf = match &nodes {
                Some(nodes) => pair_orthant_probs_qmc(&pg, nodes)?,
                None => pair_orthant_probs_factorized(&pg)?,
            };
            Ok(pair_moments(&pmf))
        })
        .collect::<Result<Vec<_>>>()?;

    let zero = Complex64::new(0.0, 0.0);
    let mut m = DMatrix::from_element(n, n, zero);
    let mut p = DMatrix::from_element(n, n, zero);
    for (&(i, l), &(mil, pil)) in pairs.iter().zip(&entries) {
        m[(i, l)] = mil;
        m[(l, i)] = mil.conj();
        p[(i, l)] = pil;
        p[(l, i)] = pil;
    }
    fill_diagonals(&mu, &mut m, &mut p);
    Ok(MomentSet { mu, m, p })
}

/// Closed form for white noise: off-diagonals `μ_iμ_l*` and `μ_iμ_l`.
pub fn moment_matrices_awgn(model: &SteeringModel, theta: &Theta, noise: &NoiseModel) -> Result<MomentSet> {
    if !noise.is_white() {
        return Err(Error::Misuse("closed-form moments require white noise".into()));
    }
    let mu = mean_vector(model, theta, noise)?;
    let n = mu.len();
    let mut m = DMatrix::from_fn(n, n, |i, l| mu[i] * mu[l].conj());
    let mut p = DMatrix::from_fn(n, n, |i, l| mu[i] * mu[l]);
    fill_diagonals(&mu, &mut m, &mut p);
    Ok(MomentSet { mu, m, p })
}

/// Closed form when the noise is white, pairwise orthants otherwise.
pub fn moment_matrices(
    model: &SteeringModel,
    theta: &Theta,
    noise: &NoiseModel,
    cfg: &OrthantConfig,
) -> Result<MomentSet> {
    if noise.is_white() {
        moment_matrices_awgn(model, theta, noise)
    } else {
        moment_matrices_colored(model, theta, noise, cfg)
    }
}
