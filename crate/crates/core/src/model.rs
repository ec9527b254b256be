//! Parametric signal families `s(θ) = β·a(φ)` with analytic steering derivatives.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CVector = DVector<Complex64>;

/// True parameter triple `[φ, β_R, β_I]`.
///
/// `phi` is in radians for the array family and in Hz for the tone family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theta {
    pub phi: f64,
    pub beta: Complex64,
}

impl Theta {
    pub fn new(phi: f64, beta: Complex64) -> Self {
        Self { phi, beta }
    }

    /// Amplitude from modulus and phase (radians).
    pub fn from_polar(phi: f64, modulus: f64, phase: f64) -> Self {
        Self { phi, beta: Complex64::from_polar(modulus, phase) }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.phi, self.beta.re, self.beta.im]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// Half-wavelength uniform linear array with `n` sensors.
    Ula { sensors: usize },
    /// Complex tone sampled at the given instants (seconds).
    Tone { times: Vec<f64> },
}

/// Parameter interval `Ω_φ`. The array family uses an open interval, the tone
/// family a half-open `[lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
}

impl Domain {
    pub fn contains(&self, phi: f64) -> bool {
        let above = if self.lo_closed { phi >= self.lo } else { phi > self.lo };
        phi.is_finite() && above && phi < self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteeringModel {
    family: Family,
    domain: Domain,
    // Per-element phase slope: a_n = exp(j·slope_n·g(φ)) / √N.
    slopes: Vec<f64>,
}

impl SteeringModel {
    /// Uniform linear array, `a_n(φ) = N^{-1/2}·exp(jπ(n − (N+1)/2)·sin φ)`.
    pub fn ula(sensors: usize) -> Result<Self> {
        if sensors == 0 {
            return Err(Error::InvalidInput("array needs at least one sensor".into()));
        }
        let center = (sensors as f64 + 1.0) / 2.0;
        let slopes = (1..=sensors).map(|n| PI * (n as f64 - center)).collect();
        Ok(Self {
            family: Family::Ula { sensors },
            domain: Domain { lo: -PI / 2.0, hi: PI / 2.0, lo_closed: false },
            slopes,
        })
    }

    /// Complex tone observed over `[-T/2, T/2]` at rate `sample_rate`, with
    /// frequencies searched over `[0, max_frequency)`.
    ///
    /// The number of samples is `T·f_s + 1`, so `T·f_s` must be an integer.
    pub fn tone(observation: f64, sample_rate: f64, max_frequency: f64) -> Result<Self> {
        if !(observation > 0.0 && sample_rate > 0.0) {
            return Err(Error::InvalidInput(
                "observation interval and sample rate must be positive".into(),
            ));
        }
        let intervals = observation * sample_rate;
        let rounded = intervals.round();
        if (intervals - rounded).abs() > 1e-9 * intervals.max(1.0) || rounded < 1.0 {
            return Err(Error::InvalidInput(format!(
                "observation interval times sample rate must be a positive integer, got {intervals}"
            )));
        }
        let count = rounded as usize + 1;
        let ts = 1.0 / sample_rate;
        let half = rounded / 2.0;
        // Built symmetric about the middle sample so that Σ t_n = 0 exactly.
        let times = (0..count).map(|i| (i as f64 - half) * ts).collect();
        Self::tone_with_times(times, max_frequency)
    }

    /// Tone family over explicit sample instants. The instants must be
    /// uniformly spaced and symmetric about zero.
    pub fn tone_with_times(times: Vec<f64>, max_frequency: f64) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::InvalidInput("empty time grid".into()));
        }
        if !(max_frequency > 0.0 && max_frequency.is_finite()) {
            return Err(Error::InvalidInput("frequency domain bound must be positive".into()));
        }
        let n = times.len();
        let span = times[n - 1] - times[0];
        let scale = span.abs().max(f64::MIN_POSITIVE);
        for i in 0..n {
            if (times[i] + times[n - 1 - i]).abs() > 1e-9 * scale {
                return Err(Error::InvalidInput("time grid is not symmetric about zero".into()));
            }
        }
        if n > 2 {
            let step = span / (n - 1) as f64;
            for w in times.windows(2) {
                if ((w[1] - w[0]) - step).abs() > 1e-9 * step.abs() {
                    return Err(Error::InvalidInput("time grid is not uniform".into()));
                }
            }
        }
        let slopes = times.iter().map(|t| 2.0 * PI * t).collect();
        Ok(Self {
            family: Family::Tone { times },
            domain: Domain { lo: 0.0, hi: max_frequency, lo_closed: true },
            slopes,
        })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn len(&self) -> usize {
        self.slopes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slopes.is_empty()
    }

    pub fn check(&self, phi: f64) -> Result<()> {
        if self.domain.contains(phi) {
            Ok(())
        } else {
            Err(Error::OutOfRange(format!(
                "φ = {phi} outside [{}, {})",
                self.domain.lo, self.domain.hi
            )))
        }
    }

    /// `K` evenly spaced search points over the domain. Open ends are
    /// avoided by using cell midpoints; a closed lower end is included.
    pub fn grid(&self, points: usize) -> Vec<f64> {
        let Domain { lo, lo_closed, .. } = self.domain;
        let step = self.domain.width() / points as f64;
        let offset = if lo_closed { 0.0 } else { 0.5 };
        (0..points).map(|k| lo + (k as f64 + offset) * step).collect()
    }

    // Inner phase variable g(φ) and its first two derivatives.
    fn phase_terms(&self, phi: f64) -> (f64, f64, f64) {
        match self.family {
            Family::Ula { .. } => {
                let (s, c) = phi.sin_cos();
                (s, c, -s)
            }
            Family::Tone { .. } => (phi, 1.0, 0.0),
        }
    }

    pub(crate) fn norm(&self) -> f64 {
        1.0 / (self.len() as f64).sqrt()
    }

    pub(crate) fn steering_unchecked(&self, phi: f64) -> CVector {
        let (g, _, _) = self.phase_terms(phi);
        let norm = self.norm();
        CVector::from_iterator(
            self.len(),
            self.slopes.iter().map(|k| Complex64::from_polar(norm, k * g)),
        )
    }
}

/// Unit-norm steering vector `a(φ)`.
pub fn steering(model: &SteeringModel, phi: f64) -> Result<CVector> {
    model.check(phi)?;
    Ok(model.steering_unchecked(phi))
}

/// First derivative `ȧ(φ)`: `ȧ_n = j·k_n·g'(φ)·a_n`.
pub fn steering_d1(model: &SteeringModel, phi: f64) -> Result<CVector> {
    model.check(phi)?;
    let (g, g1, _) = model.phase_terms(phi);
    let norm = model.norm();
    Ok(CVector::from_iterator(
        model.len(),
        model.slopes.iter().map(|k| {
            Complex64::new(0.0, k * g1) * Complex64::from_polar(norm, k * g)
        }),
    ))
}

/// Second derivative `ä(φ)`: `ä_n = (j·k_n·g''(φ) − k_n²·g'(φ)²)·a_n`.
pub fn steering_d2(model: &SteeringModel, phi: f64) -> Result<CVector> {
    model.check(phi)?;
    let (g, g1, g2) = model.phase_terms(phi);
    let norm = model.norm();
    Ok(CVector::from_iterator(
        model.len(),
        model.slopes.iter().map(|k| {
            Complex64::new(-(k * g1).powi(2), k * g2) * Complex64::from_polar(norm, k * g)
        }),
    ))
}

/// `s(θ) = β·a(φ)`.
pub fn signal(model: &SteeringModel, theta: &Theta) -> Result<CVector> {
    Ok(steering(model, theta.phi)? * theta.beta)
}
