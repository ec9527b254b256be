//! Performance bounds for estimators that ignore one-bit quantization.
//!
//! A narrowband signal `s(θ) = β·a(φ)` observed in complex Gaussian noise is
//! sign-quantized per real and imaginary part. A conventional estimator that
//! treats the quantized samples as if they were Gaussian is misspecified;
//! this crate computes
//!
//! * the quantized-data statistics `μ = E[z]`, `M = E[zzᴴ]`, `P = E[zzᵀ]`
//!   (closed form for white noise, pairwise orthant probabilities for
//!   band-limited colored noise),
//! * the pseudo-true parameter, the misspecified ambiguity function and the
//!   resulting estimation bias,
//! * the misspecified Cramér-Rao bound for `φ` and the MSE bound,
//! * the Cramér-Rao bound of the correctly specified quantized model,
//!
//! and provides the grid-search correlator estimator plus a reproducible
//! Monte Carlo harness to check the bounds against.

pub mod bounds;
pub mod bvn;
pub mod complexity;
pub mod error;
pub mod estimators;
pub mod model;
pub mod noise;
pub mod orthant;
pub mod quantize;
pub mod sobol;

pub use bounds::{
    ambiguity_function, bias_phi, evaluate, maf, mcrb, mse_bound, pseudo_true, psi, quantized_crb,
    BoundReport, McrbIntermediates,
};
pub use complexity::{cost_fine, cost_quantized, cost_ratio, lookup_table_cost, oversampled_ratio, OpCount};
pub use error::{Error, Result};
pub use estimators::{measure_ops, ml_estimate, monte_carlo, monte_carlo_with, GridEstimator, McConfig, McResult, SearchConfig};
pub use model::{signal, steering, steering_d1, steering_d2, Family, SteeringModel, Theta};
pub use noise::{covariance, sample_noise, trial_rng, NoiseKind, NoiseModel, NoiseSampler};
pub use orthant::{
    moment_matrices, moment_matrices_awgn, moment_matrices_colored, pair_orthant_probs,
    pair_orthant_probs_factorized, MomentSet, OrthantConfig, OrthantMethod, PairwiseGaussian,
};
pub use quantize::{
    mean_vector, one_bit_quantize, q_function, q_vector, sample_pmf,
    single_sample_second_moments, QuantizedVector,
};

pub use num_complex::Complex64;
