//! Real-operation counts of the correlator grid search.
//!
//! Counting rules (one unit = one real multiplication, addition or
//! subtraction):
//!
//! * fine data: each term `a_n*·x_n` costs 4 multiplications and 2
//!   additions/subtractions;
//! * one-bit data: each term is read from a table of the four possible
//!   products `{±f_n ± j·d_n}`, built once offline at `4·N·K` operations
//!   and not charged to the search;
//! * accumulating `N` complex terms costs `2(N−1)` additions;
//! * `|c|²` costs 2 multiplications and 1 addition.
//!
//! [`Arith`] lets the estimator kernel run either with plain arithmetic or
//! with a counter attached, so measured counts come from the same code path
//! that produces estimates.

use std::cell::Cell;

/// Operation count for a grid search of `grid` points over `samples` samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OpCount {
    pub real_ops: u64,
    pub samples: usize,
    pub grid: usize,
}

/// `C_z = (2N + 1)·K`.
pub fn cost_quantized(samples: usize, grid: usize) -> OpCount {
    OpCount { real_ops: (2 * samples as u64 + 1) * grid as u64, samples, grid }
}

/// `C_x = (8N + 1)·K`.
pub fn cost_fine(samples: usize, grid: usize) -> OpCount {
    OpCount { real_ops: (8 * samples as u64 + 1) * grid as u64, samples, grid }
}

/// Offline cost of the one-bit product table, `4·N·K`.
pub fn lookup_table_cost(samples: usize, grid: usize) -> u64 {
    4 * samples as u64 * grid as u64
}

/// `C_z / C_x`, tending to 1/4 as `N` grows.
pub fn cost_ratio(samples: usize) -> f64 {
    (2 * samples + 1) as f64 / (8 * samples + 1) as f64
}

/// Cost of one-bit processing at `U·N` samples relative to fine processing
/// at `N` samples: `(2UN + 1)/(8N + 1)`, tending to `U/4`.
pub fn oversampled_ratio(samples: usize, grid: usize, oversampling: f64) -> f64 {
    let _ = grid; // K cancels.
    (2.0 * oversampling * samples as f64 + 1.0) / (8.0 * samples as f64 + 1.0)
}

/// Arithmetic used by the correlator kernels.
pub trait Arith {
    fn mul(&self, a: f64, b: f64) -> f64;
    fn add(&self, a: f64, b: f64) -> f64;
    fn sub(&self, a: f64, b: f64) -> f64;
}

/// Uninstrumented arithmetic.
#[derive(Debug, Clone, Copy, Default)]
pub struct Plain;

impl Arith for Plain {
    #[inline(always)]
    fn mul(&self, a: f64, b: f64) -> f64 {
        a * b
    }
    #[inline(always)]
    fn add(&self, a: f64, b: f64) -> f64 {
        a + b
    }
    #[inline(always)]
    fn sub(&self, a: f64, b: f64) -> f64 {
        a - b
    }
}

/// Arithmetic that tallies every operation.
#[derive(Debug, Default)]
pub struct Counting {
    ops: Cell<u64>,
}

impl Counting {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn count(&self) -> u64 {
        self.ops.get()
    }

    fn tick(&self) {
        self.ops.set(self.ops.get() + 1);
    }
}

impl Arith for Counting {
    fn mul(&self, a: f64, b: f64) -> f64 {
        self.tick();
        a * b
    }
    fn add(&self, a: f64, b: f64) -> f64 {
        self.tick();
        a + b
    }
    fn sub(&self, a: f64, b: f64) -> f64 {
        self.tick();
        a - b
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formula_values() {
        assert_eq!(cost_quantized(16, 1).real_ops, 33);
        assert_eq!(cost_fine(16, 1).real_ops, 129);
        assert_eq!(cost_quantized(1, 1).real_ops, 3);
        assert_eq!(cost_fine(1, 1).real_ops, 9);
        assert_eq!(cost_fine(16, 4096).real_ops, 129 * 4096);
        assert_eq!(lookup_table_cost(16, 10), 640);
    }

    #[test]
    fn ratios() {
        assert!((cost_ratio(1 << 20) - 0.25).abs() < 1e-6);
        assert!((oversampled_ratio(16, 1, 1.0) - 33.0 / 129.0).abs() < 1e-15);
        assert!((oversampled_ratio(1 << 20, 1, 4.0) - 1.0).abs() < 1e-6);
        assert!((oversampled_ratio(1 << 20, 1, 2.0) - 0.5).abs() < 1e-6);
    }

    #[test]
    fn counter_tallies() {
        let c = Counting::new();
        let x = c.add(c.mul(2.0, 3.0), c.sub(1.0, 4.0));
        assert_eq!(x, 3.0);
        assert_eq!(c.count(), 3);
    }
}
