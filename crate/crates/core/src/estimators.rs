//! Correlator grid-search estimator and the Monte Carlo harness.
//!
//! The misspecified ML estimate is `argmax_φ' |a(φ')ᴴ·u|²` for fine data
//! `u = x` and for one-bit data `u = z` alike. The search scans a `K`-point
//! grid over the domain and refines the best cell by golden-section search.

use rayon::prelude::*;

use crate::complexity::{Arith, Counting, Plain};
use crate::error::{Error, Result};
use crate::model::{signal, CVector, Domain, SteeringModel, Theta};
use crate::noise::{trial_rng, NoiseModel, NoiseSampler};
use crate::quantize::{one_bit_quantize, QuantizedVector};

/// Relative margin under which two grid values count as a tie.
const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    pub grid_size: usize,
    pub refine_tolerance: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { grid_size: 4096, refine_tolerance: 1e-8 }
    }
}

impl SearchConfig {
    pub fn new(grid_size: usize, refine_tolerance: f64) -> Result<Self> {
        let cfg = Self { grid_size, refine_tolerance };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_size < 2 {
            return Err(Error::InvalidInput("grid size must be at least 2".into()));
        }
        if !(self.refine_tolerance > 0.0) {
            return Err(Error::InvalidInput("refinement tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// Index of the largest value; near-ties go to the lowest index.
pub(crate) fn grid_argmax(values: impl IntoIterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.into_iter().enumerate() {
        match best {
            Some((_, b)) if v <= b + TIE_TOLERANCE * b.abs() => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i)
}

/// Golden-section maximization of `f` on `[lo, hi]` down to `tol`.
pub(crate) fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

/// Grid maximization of a continuous objective followed by refinement of
/// the winning cell. The refined point is kept only if it does not lower
/// the objective.
pub(crate) fn maximize_on_grid(
    objective: impl Fn(f64) -> f64,
    grid: &[f64],
    grid_values: &[f64],
    domain: Domain,
    tol: f64,
) -> f64 {
    let k = grid_argmax(grid_values.iter().copied()).expect("grid is nonempty");
    let lo = if k > 0 { grid[k - 1] } else { grid[k].max(domain.lo) };
    let hi = if k + 1 < grid.len() { grid[k + 1] } else { grid[k] };
    if hi - lo <= tol {
        return grid[k];
    }
    let refined = golden_max(&objective, lo, hi, tol);
    if objective(refined) >= grid_values[k] {
        refined
    } else {
        grid[k]
    }
}

/// Correlator search with the grid steering vectors and the one-bit
/// product table precomputed.
#[derive(Debug, Clone)]
pub struct GridEstimator {
    model: SteeringModel,
    search: SearchConfig,
    grid: Vec<f64>,
    // Row-major K×N steering values (re, im).
    steering: Vec<[f64; 2]>,
    // Row-major K×N table of a_n*·z_n for the four outcomes, as (re, im).
    table: Vec<[[f64; 2]; 4]>,
}

impl GridEstimator {
    pub fn new(model: &SteeringModel, search: &SearchConfig) -> Result<Self> {
        search.validate()?;
        let grid = model.grid(search.grid_size);
        let n = model.len();
        let mut steering = Vec::with_capacity(grid.len() * n);
        let mut table = Vec::with_capacity(grid.len() * n);
        for &phi in &grid {
            for a in model.steering_unchecked(phi).iter() {
                steering.push([a.re, a.im]);
                let f = a.re + a.im;
                let d = a.re - a.im;
                // Outcome order: −1−j, −1+j, 1−j, 1+j.
                table.push([[-f, -d], [-d, f], [d, -f], [f, d]]);
            }
        }
        Ok(Self { model: model.clone(), search: *search, grid, steering, table })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn model(&self) -> &SteeringModel {
        &self.model
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.model.len() {
            return Err(Error::InvalidInput(format!(
                "data has {len} samples, model expects {}",
                self.model.len()
            )));
        }
        Ok(())
    }

    /// `|a(φ_k)ᴴ·x|²` at grid point `k` for fine data.
    pub fn fine_power<A: Arith>(&self, k: usize, x: &[[f64; 2]], ops: &A) -> f64 {
        let n = x.len();
        let row = &self.steering[k * n..(k + 1) * n];
        let mut acc: Option<(f64, f64)> = None;
        for (a, x) in row.iter().zip(x) {
            let re = ops.add(ops.mul(x[0], a[0]), ops.mul(x[1], a[1]));
            let im = ops.sub(ops.mul(x[1], a[0]), ops.mul(x[0], a[1]));
            acc = Some(match acc {
                None => (re, im),
                Some((r, i)) => (ops.add(r, re), ops.add(i, im)),
            });
        }
        let (re, im) = acc.unwrap_or((0.0, 0.0));
        ops.add(ops.mul(re, re), ops.mul(im, im))
    }

    /// `|a(φ_k)ᴴ·z|²` at grid point `k` for one-bit data given as outcome indices.
    pub fn quantized_power<A: Arith>(&self, k: usize, outcomes: &[usize], ops: &A) -> f64 {
        let n = outcomes.len();
        let row = &self.table[k * n..(k + 1) * n];
        let mut acc: Option<(f64, f64)> = None;
        for (entry, &o) in row.iter().zip(outcomes) {
            let [re, im] = entry[o];
            acc = Some(match acc {
                None => (re, im),
                Some((r, i)) => (ops.add(r, re), ops.add(i, im)),
            });
        }
        let (re, im) = acc.unwrap_or((0.0, 0.0));
        ops.add(ops.mul(re, re), ops.mul(im, im))
    }

    fn refine(&self, data: &CVector, grid_values: &[f64]) -> f64 {
        let objective = |phi: f64| self.model.steering_unchecked(phi).dotc(data).norm_sqr();
        maximize_on_grid(
            objective,
            &self.grid,
            grid_values,
            self.model.domain(),
            self.search.refine_tolerance,
        )
    }

    /// Estimate from unquantized data.
    pub fn estimate_fine(&self, x: &CVector) -> Result<f64> {
        self.check_len(x.len())?;
        if x.iter().all(|v| v.norm_sqr() == 0.0) {
            return Err(Error::DegenerateData);
        }
        if x.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidInput("non-finite sample".into()));
        }
        let packed: Vec<[f64; 2]> = x.iter().map(|v| [v.re, v.im]).collect();
        let values: Vec<f64> = (0..self.grid.len()).map(|k| self.fine_power(k, &packed, &Plain)).collect();
        Ok(self.refine(x, &values))
    }

    /// Estimate from one-bit data using the product table.
    pub fn estimate_quantized(&self, z: &QuantizedVector) -> Result<f64> {
        self.check_len(z.len())?;
        let outcomes: Vec<usize> = z.outcomes().collect();
        let values: Vec<f64> =
            (0..self.grid.len()).map(|k| self.quantized_power(k, &outcomes, &Plain)).collect();
        Ok(self.refine(z.as_vector(), &values))
    }
}

/// Operation counts `(one-bit, fine)` of a full grid scan, measured by running
/// both correlator kernels with a [`Counting`] tally over every grid point.
pub fn measure_ops(model: &SteeringModel, search: &SearchConfig) -> Result<(u64, u64)> {
    let est = GridEstimator::new(model, search)?;
    let n = model.len();
    let x: Vec<[f64; 2]> = (0..n).map(|i| [1.0 + i as f64, 0.5 - i as f64]).collect();
    let outcomes: Vec<usize> = (0..n).map(|i| (i * 7 + 3) % 4).collect();
    let (quantized, fine) = (Counting::new(), Counting::new());
    for k in 0..est.grid.len() {
        est.quantized_power(k, &outcomes, &quantized);
        est.fine_power(k, &x, &fine);
    }
    Ok((quantized.count(), fine.count()))
}

/// One-shot misspecified ML estimate, `argmax_φ' |a(φ')ᴴ·data|²`.
pub fn ml_estimate(model: &SteeringModel, data: &CVector, search: &SearchConfig) -> Result<f64> {
    GridEstimator::new(model, search)?.estimate_fine(data)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub trials: usize,
    pub quantized: bool,
    pub seed: u64,
    pub parallel: bool,
}

impl Default for McConfig {
    fn default() -> Self {
        Self { trials: 1000, quantized: true, seed: 1, parallel: true }
    }
}

/// Empirical error statistics of the estimator at one scenario point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McResult {
    pub rmse: f64,
    pub mean_bias: f64,
    pub mean_estimate: f64,
    pub trials: usize,
    /// Standard error of the mean estimate.
    pub bias_std_error: f64,
    /// Standard error of the RMSE (delta method on the MSE).
    pub rmse_std_error: f64,
}

/// Pairwise summation; fixed association order for a given length.
pub(crate) fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

fn summarize(errors: &[f64], truth: f64) -> McResult {
    let n = errors.len() as f64;
    let mean_bias = pairwise_sum(errors) / n;
    let squares: Vec<f64> = errors.iter().map(|e| e * e).collect();
    let mse = pairwise_sum(&squares) / n;
    let centered: Vec<f64> = errors.iter().map(|e| (e - mean_bias).powi(2)).collect();
    let quartic: Vec<f64> = squares.iter().map(|s| (s - mse).powi(2)).collect();
    let denom = (n - 1.0).max(1.0);
    let var = pairwise_sum(&centered) / denom;
    let var_sq = pairwise_sum(&quartic) / denom;
    let rmse = mse.sqrt();
    McResult {
        rmse,
        mean_bias,
        mean_estimate: truth + mean_bias,
        trials: errors.len(),
        bias_std_error: (var / n).sqrt(),
        rmse_std_error: if rmse > 0.0 { (var_sq / n).sqrt() / (2.0 * rmse) } else { 0.0 },
    }
}

/// Runs `trials` independent realizations of `x = s(θ) + v` (optionally
/// one-bit quantized) through the correlator estimator.
///
/// Trial `t` draws its noise from [`trial_rng`]`(seed, t)`, so the result is
/// bit-identical for serial and parallel execution.
pub fn monte_carlo(
    model: &SteeringModel,
    theta: &Theta,
    noise: &NoiseModel,
    search: &SearchConfig,
    cfg: &McConfig,
) -> Result<McResult> {
    if cfg.trials == 0 {
        return Err(Error::InvalidInput("at least one trial is required".into()));
    }
    let estimator = GridEstimator::new(model, search)?;
    let sampler = NoiseSampler::new(noise, model.len())?;
    let s = signal(model, theta)?;
    monte_carlo_with(&estimator, &sampler, &s, theta.phi, cfg)
}

/// Monte Carlo with a prebuilt estimator and sampler, for sweeps that reuse them.
pub fn monte_carlo_with(
    estimator: &GridEstimator,
    sampler: &NoiseSampler,
    s: &CVector,
    truth: f64,
    cfg: &McConfig,
) -> Result<McResult> {
    if cfg.trials == 0 {
        return Err(Error::InvalidInput("at least one trial is required".into()));
    }
    let run = |t: usize| -> Result<f64> {
        let mut rng = trial_rng(cfg.seed, t as u64);
        let x: CVector = s + sampler.sample(&mut rng);
        let est = if cfg.quantized {
            estimator.estimate_quantized(&one_bit_quantize(&x)?)?
        } else {
            estimator.estimate_fine(&x)?
        };
        Ok(est - truth)
    };
    let errors: Vec<f64> = if cfg.parallel {
        (0..cfg.trials).into_par_iter().map(run).collect::<Result<_>>()?
    } else {
        (0..cfg.trials).map(run).collect::<Result<_>>()?
    };
    Ok(summarize(&errors, truth))
}
