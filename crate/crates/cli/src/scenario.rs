//! Scenario files: model, noise, sweep and requested outputs.

use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    Af,
    Maf,
    Bias,
    Mcrb,
    Crb,
    MseBound,
    McRmse,
    McRmseFine,
    Complexity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelConfig {
    Ula {
        sensors: usize,
    },
    Tone {
        observation_s: f64,
        /// Sampling rate at `U = 1`; the actual rate is `U` times this.
        base_rate_hz: f64,
        max_frequency_hz: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKindConfig {
    #[default]
    White,
    Sinc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    #[serde(default = "one")]
    pub variance: f64,
    #[serde(default)]
    pub kind: NoiseKindConfig,
    /// Noise bandwidth for `kind = "sinc"`; defaults to half the base rate,
    /// which makes `U = 1` white.
    pub bandwidth_hz: Option<f64>,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self { variance: 1.0, kind: NoiseKindConfig::White, bandwidth_hz: None }
    }
}

/// Either an explicit list or an inclusive `{ start, stop, step }` range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Values {
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl Values {
    pub fn single(v: f64) -> Self {
        Values::List(vec![v])
    }

    pub fn expand(&self, path: &str) -> Result<Vec<f64>, CliError> {
        match self {
            Values::List(v) if v.is_empty() => Err(CliError::config(path, "empty list")),
            Values::List(v) => Ok(v.clone()),
            Values::Range { start, stop, step } => {
                if !(*step > 0.0) || !(stop >= start) {
                    return Err(CliError::config(path, "range needs step > 0 and stop ≥ start"));
                }
                let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
                if count > 1_000_000 {
                    return Err(CliError::config(path, "range has more than 10⁶ values"));
                }
                Ok((0..count).map(|i| start + i as f64 * step).collect())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnrReference {
    /// `SNR = |β|²/σ²`.
    #[default]
    Total,
    /// `SNR = |β|²/(Nσ²)`, the power of one sample over the noise.
    PerSample,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    /// Degrees for the array, hertz for the tone.
    #[default]
    Native,
    /// Spatial frequency `u = sin φ` (array only).
    U,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub phi: Values,
    #[serde(default)]
    pub axis: Axis,
    pub snr_db: Values,
    #[serde(default = "zero_values")]
    pub angle_beta_deg: Values,
    #[serde(default = "unit_values")]
    pub oversampling: Values,
    #[serde(default)]
    pub snr_reference: SnrReference,
    /// Points of the `φ′` axis of ambiguity-function surfaces.
    #[serde(default = "surface_points")]
    pub surface_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSettings {
    #[serde(default = "grid_size")]
    pub grid: usize,
    #[serde(default = "tolerance")]
    pub tolerance: f64,
}

impl Default for SearchSettings {
    fn default() -> Self {
        Self { grid: grid_size(), tolerance: tolerance() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrthantSettings {
    #[serde(default = "qmc_points")]
    pub points: usize,
    #[serde(default)]
    pub factorized: bool,
}

impl Default for OrthantSettings {
    fn default() -> Self {
        Self { points: qmc_points(), factorized: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub model: ModelConfig,
    #[serde(default)]
    pub noise: NoiseConfig,
    pub sweep: SweepConfig,
    #[serde(default)]
    pub search: SearchSettings,
    #[serde(default)]
    pub orthant: OrthantSettings,
    #[serde(default = "trials")]
    pub trials: usize,
    #[serde(default = "seed")]
    pub seed: u64,
    pub outputs: Vec<Output>,
}

fn one() -> f64 {
    1.0
}
fn zero_values() -> Values {
    Values::single(0.0)
}
fn unit_values() -> Values {
    Values::single(1.0)
}
fn surface_points() -> usize {
    201
}
fn grid_size() -> usize {
    4096
}
fn tolerance() -> f64 {
    1e-8
}
fn qmc_points() -> usize {
    1 << 16
}
fn trials() -> usize {
    1000
}
fn seed() -> u64 {
    1
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let scenario: Scenario = toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn is_ula(&self) -> bool {
        matches!(self.model, ModelConfig::Ula { .. })
    }

    /// Checks every field; errors carry the offending field path.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.name.is_empty() || !self.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            return Err(CliError::config("name", "use letters, digits, '-' and '_' only"));
        }
        if self.outputs.is_empty() {
            return Err(CliError::config("outputs", "request at least one output"));
        }
        let sweep = &self.sweep;
        let phis = sweep.phi.expand("sweep.phi")?;
        let snrs = sweep.snr_db.expand("sweep.snr_db")?;
        let phases = sweep.angle_beta_deg.expand("sweep.angle_beta_deg")?;
        let us = sweep.oversampling.expand("sweep.oversampling")?;
        for (i, v) in snrs.iter().chain(&phases).enumerate() {
            if !v.is_finite() {
                return Err(CliError::config(&format!("sweep value {i}"), "must be finite"));
            }
        }
        if !(self.noise.variance > 0.0 && self.noise.variance.is_finite()) {
            return Err(CliError::config("noise.variance", "must be positive"));
        }
        if self.search.grid < 2 {
            return Err(CliError::config("search.grid", "must be at least 2"));
        }
        if !(self.search.tolerance > 0.0) {
            return Err(CliError::config("search.tolerance", "must be positive"));
        }
        if self.orthant.points == 0 {
            return Err(CliError::config("orthant.points", "must be positive"));
        }
        if self.trials == 0 && self.outputs.iter().any(|o| matches!(o, Output::McRmse | Output::McRmseFine)) {
            return Err(CliError::config("trials", "must be at least 1"));
        }
        if sweep.surface_points < 2 {
            return Err(CliError::config("sweep.surface_points", "must be at least 2"));
        }
        match &self.model {
            ModelConfig::Ula { sensors } => {
                if *sensors == 0 {
                    return Err(CliError::config("model.sensors", "must be at least 1"));
                }
                if us != [1.0] {
                    return Err(CliError::config("sweep.oversampling", "only the tone model is oversampled"));
                }
                if self.noise.kind != NoiseKindConfig::White {
                    return Err(CliError::config("noise.kind", "the array model uses white noise"));
                }
                for (i, &p) in phis.iter().enumerate() {
                    let ok = match sweep.axis {
                        Axis::Native => p > -90.0 && p < 90.0,
                        Axis::U => p > -1.0 && p < 1.0,
                    };
                    if !ok {
                        return Err(CliError::config(&format!("sweep.phi[{i}]"), "outside the open array domain"));
                    }
                }
            }
            ModelConfig::Tone { observation_s, base_rate_hz, max_frequency_hz } => {
                if sweep.axis == Axis::U {
                    return Err(CliError::config("sweep.axis", "the u axis applies to the array model"));
                }
                if !(*observation_s > 0.0 && *base_rate_hz > 0.0 && *max_frequency_hz > 0.0) {
                    return Err(CliError::config("model", "tone parameters must be positive"));
                }
                for (i, &u) in us.iter().enumerate() {
                    let steps = observation_s * base_rate_hz * u;
                    if !(u >= 1.0) || (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
                        return Err(CliError::config(
                            &format!("sweep.oversampling[{i}]"),
                            "needs U ≥ 1 and an integer number of sampling intervals",
                        ));
                    }
                }
                for (i, &p) in phis.iter().enumerate() {
                    if !(p >= 0.0 && p < *max_frequency_hz) {
                        return Err(CliError::config(&format!("sweep.phi[{i}]"), "outside [0, max_frequency_hz)"));
                    }
                }
                if let Some(b) = self.noise.bandwidth_hz {
                    if !(b > 0.0) {
                        return Err(CliError::config("noise.bandwidth_hz", "must be positive"));
                    }
                    if 2.0 * b > *base_rate_hz * us.iter().cloned().fold(f64::INFINITY, f64::min) + 1e-9 {
                        return Err(CliError::config("noise.bandwidth_hz", "undersampled at the lowest rate"));
                    }
                }
                if self.outputs.contains(&Output::Crb) && self.noise.kind == NoiseKindConfig::Sinc {
                    let base = *base_rate_hz;
                    let b = self.noise.bandwidth_hz.unwrap_or(base / 2.0);
                    if us.iter().any(|u| {
                        let ratio = 2.0 * b / (base * u);
                        (ratio - ratio.round()).abs() > 1e-12 || ratio.round() == 0.0
                    }) {
                        return Err(CliError::config("outputs", "crb needs white noise at every oversampling factor"));
                    }
                }
            }
        }
        Ok(())
    }
}
