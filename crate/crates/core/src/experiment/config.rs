//! Simulation configuration: a single TOML key-value file plus presets
//! embedding the channel experiment parameters.

use crate::error::{Error, Result};
use crate::models::{MediumParams, ModelKind};
use crate::newmark::FixedPointSettings;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    pub degree: usize,
    pub n_elements: usize,
    /// Channel length l in meters.
    pub length: f64,
}

impl Default for MeshConfig {
    fn default() -> Self {
        MeshConfig {
            degree: 2,
            n_elements: 249,
            length: 0.2,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub n_steps: usize,
    /// Final time T in seconds.
    pub final_time: f64,
}

impl Default for TimeConfig {
    fn default() -> Self {
        TimeConfig {
            n_steps: 800,
            final_time: 45e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialPreset {
    /// ψ₀ = 0, ψ₁ = A exp(-(x-x₀)²/(2s²)), ψ₂ = 0.
    Gaussian,
    Zero,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialConfig {
    pub preset: InitialPreset,
    /// Pulse amplitude A (m²/s²).
    pub amplitude: f64,
    /// Pulse center x₀ (m).
    pub center: f64,
    /// Pulse width s (m).
    pub width: f64,
}

impl Default for InitialConfig {
    fn default() -> Self {
        InitialConfig {
            preset: InitialPreset::Gaussian,
            amplitude: 8e4,
            center: 0.1,
            width: 0.01,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Steps between stored trajectory snapshots.
    pub snapshot_stride: usize,
    /// Times (s) at which pressure snapshot CSVs are emitted in addition to
    /// the final one; each resolves to the nearest stored step.
    pub snapshot_times: Vec<f64>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            snapshot_stride: 1,
            snapshot_times: Vec::new(),
        }
    }
}

/// Pulse amplitude that reproduces the reference channel-experiment curves
/// (τ = 0 peak pressure 56.56 MPa at x = 0.1753 m after 45 µs).
///
/// The nominal amplitude of the experiment is quoted as 8e4 m²/s²; the
/// reference pressure and error curves correspond to 1.5 times that value,
/// recovered here by matching the τ ∈ {0, 0.5, 1} µs peak values and
/// locations to five significant digits.
pub const FIGURE_PULSE_AMPLITUDE: f64 = 1.2e5;

/// One simulation.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub model: ModelKind,
    /// Relaxation time τ (s); must be 0 for the limit models.
    pub tau: f64,
    #[serde(default = "MediumParams::water")]
    pub medium: MediumParams,
    #[serde(default)]
    pub mesh: MeshConfig,
    #[serde(default)]
    pub time: TimeConfig,
    #[serde(default)]
    pub initial: InitialConfig,
    #[serde(default)]
    pub fixed_point: FixedPointSettings,
    #[serde(default)]
    pub output: OutputConfig,
    /// τ values of a sweep (descending order is enforced by the driver);
    /// only used by the sweep-tau command.
    #[serde(default)]
    pub sweep_taus: Option<Vec<f64>>,
}

impl SimConfig {
    /// The channel experiment: water, 249 quadratic elements on 0.2 m,
    /// 800 steps to 45 µs, Gaussian pulse, fixed-point tolerance 1e-8.
    pub fn paper_preset(model: ModelKind, tau: f64) -> Self {
        SimConfig {
            model,
            tau,
            medium: MediumParams::water(),
            mesh: MeshConfig::default(),
            time: TimeConfig::default(),
            initial: InitialConfig::default(),
            fixed_point: FixedPointSettings::default(),
            output: OutputConfig::default(),
            sweep_taus: None,
        }
    }

    /// Pressure-snapshot preset (`paper-fig1`): the channel experiment with
    /// the figure-calibrated pulse amplitude. τ = 0 selects the Westervelt
    /// limit, τ > 0 the Westervelt-type JMGT equation.
    pub fn paper_fig1_preset(tau: f64) -> Result<Self> {
        if tau < 0.0 {
            return Err(Error::Config(format!("tau must be >= 0, got {tau}")));
        }
        let model = if tau > 0.0 {
            ModelKind::JmgtWestervelt
        } else {
            ModelKind::Westervelt
        };
        let mut cfg = Self::paper_preset(model, tau);
        cfg.initial.amplitude = FIGURE_PULSE_AMPLITUDE;
        Ok(cfg)
    }

    /// Relaxation-time sweep preset (`paper-fig2`): Westervelt-type JMGT with
    /// the figure-calibrated amplitude over the τ grid
    /// (0.0001 + 0.02k) µs, k = 0..=49, emitted in descending order.
    pub fn paper_fig2_preset() -> Self {
        let taus: Vec<f64> = (0..=49)
            .rev()
            .map(|k| (1e-4 + 2e-2 * k as f64) * 1e-6)
            .collect();
        let mut cfg = Self::paper_preset(ModelKind::JmgtWestervelt, 1e-7);
        cfg.initial.amplitude = FIGURE_PULSE_AMPLITUDE;
        cfg.sweep_taus = Some(taus);
        cfg
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: SimConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("TOML parse: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.medium.validate()?;
        if self.model.is_third_order() != (self.tau > 0.0) {
            return Err(Error::Config(format!(
                "model {:?} incompatible with tau = {}",
                self.model, self.tau
            )));
        }
        if self.tau < 0.0 {
            return Err(Error::Config(format!("tau must be >= 0, got {}", self.tau)));
        }
        if self.mesh.degree < 1 || self.mesh.n_elements < 1 || !(self.mesh.length > 0.0) {
            return Err(Error::Config(format!(
                "invalid mesh: degree {}, {} elements, length {}",
                self.mesh.degree, self.mesh.n_elements, self.mesh.length
            )));
        }
        if self.time.n_steps == 0 || !(self.time.final_time > 0.0) {
            return Err(Error::Config(format!(
                "invalid time grid: {} steps, final time {}",
                self.time.n_steps, self.time.final_time
            )));
        }
        if !(self.fixed_point.tol > 0.0) {
            return Err(Error::Config(format!(
                "fixed-point tolerance must be positive, got {}",
                self.fixed_point.tol
            )));
        }
        if self.output.snapshot_stride == 0 {
            return Err(Error::Config("snapshot_stride must be >= 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_preset_round_trips_through_toml() {
        let cfg = SimConfig::paper_preset(ModelKind::JmgtWestervelt, 1e-7);
        let text = cfg.to_toml_string();
        let back = SimConfig::from_toml_str(&text).unwrap();
        assert_eq!(back.model, ModelKind::JmgtWestervelt);
        assert_eq!(back.tau, 1e-7);
        assert_eq!(back.mesh.n_elements, 249);
        assert_eq!(back.time.n_steps, 800);
        assert_eq!(back.initial.amplitude, 8e4);
        assert_eq!(back.fixed_point.tol, 1e-8);
    }

    #[test]
    fn minimal_config_uses_defaults() {
        let cfg = SimConfig::from_toml_str("model = \"westervelt\"\ntau = 0.0\n").unwrap();
        assert_eq!(cfg.mesh.n_elements, 249);
        assert_eq!(cfg.medium.c, 1500.0);
        assert_eq!(cfg.output.snapshot_stride, 1);
    }

    #[test]
    fn model_tau_mismatch_is_a_config_error() {
        let r = SimConfig::from_toml_str("model = \"westervelt\"\ntau = 1e-7\n");
        assert!(matches!(r, Err(Error::Config(_))));
        let r = SimConfig::from_toml_str("model = \"jmgt-westervelt\"\ntau = 0.0\n");
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let r = SimConfig::from_toml_str("model = \"westervelt\"\ntau = 0.0\nbogus = 1\n");
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn fig2_grid_endpoints() {
        let cfg = SimConfig::paper_fig2_preset();
        let taus = cfg.sweep_taus.unwrap();
        assert_eq!(taus.len(), 50);
        approx::assert_relative_eq!(taus[0], 9.801e-7, max_relative = 1e-12);
        approx::assert_relative_eq!(taus[49], 1e-10, max_relative = 1e-12);
        assert!(taus.windows(2).all(|w| w[0] > w[1]));
    }
}
