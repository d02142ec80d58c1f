//! Run configuration: strict JSON, unknown keys rejected at every level.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::bounds::SuperpositionSpec;
use crate::error::{Error, Result};
use crate::units::PhysicalConstants;

/// Scalar fields a sweep may vary.
pub const SWEEP_PARAMETERS: [&str; 6] = ["R", "bob_mass", "bob_charge", "sigma", "alice.magnitude", "alice.separation_d"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constants: Option<ConstantsOverride>,
    pub scenario: ScenarioConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub echo: EchoConfig,
    #[serde(default)]
    pub causality: CausalityConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radiation: Option<RadiationConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vacuum: Option<VacuumConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interference: Option<InterferenceConfig>,
}

/// SI values replacing the CODATA defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsOverride {
    pub hbar: Option<f64>,
    pub c: Option<f64>,
    #[serde(rename = "G")]
    pub g: Option<f64>,
    pub epsilon0: Option<f64>,
    pub e_charge: Option<f64>,
}

impl ConstantsOverride {
    pub fn apply(&self, base: PhysicalConstants) -> Result<PhysicalConstants> {
        PhysicalConstants::new(
            self.hbar.unwrap_or(base.hbar()),
            self.c.unwrap_or(base.c()),
            self.g.unwrap_or(base.g()),
            self.epsilon0.unwrap_or(base.epsilon0()),
            self.e_charge.unwrap_or(base.e_charge()),
        )
    }
}

/// Alice's superposition plus Bob's probe; Bob's fields are needed only
/// by the subcommands that use them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub alice: SuperpositionSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bob_mass: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bob_charge: Option<f64>,
    /// Lab separation in metres.
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    pub distance: Option<f64>,
    /// Bob's localization width; the localization limit when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
}

impl ScenarioConfig {
    fn with(mut self, parameter: &str, value: f64) -> Self {
        match parameter {
            "R" => self.distance = Some(value),
            "bob_mass" => self.bob_mass = Some(value),
            "bob_charge" => self.bob_charge = Some(value),
            "sigma" => self.sigma = Some(value),
            "alice.magnitude" => self.alice.magnitude = value,
            "alice.separation_d" => self.alice.separation_d = value,
            other => unreachable!("sweep parameter `{other}` passed validation"),
        }
        self
    }

    pub fn require(value: Option<f64>, name: &str, subcommand: &str) -> Result<f64> {
        value.ok_or_else(|| Error::Config(format!("scenario.{name} is required for `{subcommand}`")))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub parameter: String,
    pub min: f64,
    pub max: f64,
    pub points: usize,
    #[serde(default)]
    pub scale: Scale,
}

impl Sweep {
    fn validate(&self) -> Result<()> {
        if !SWEEP_PARAMETERS.contains(&self.parameter.as_str()) {
            return Err(Error::Config(format!(
                "sweep.parameter: unknown field `{}`, expected one of {}",
                self.parameter,
                SWEEP_PARAMETERS.join(", ")
            )));
        }
        if self.points == 0 {
            return Err(Error::Config("sweep.points must be at least 1".into()));
        }
        if !(self.min.is_finite() && self.max.is_finite() && self.max >= self.min) {
            return Err(Error::Config(format!("sweep range [{}, {}] is not a finite, ordered interval", self.min, self.max)));
        }
        if self.scale == Scale::Log && self.min <= 0.0 {
            return Err(Error::Config("sweep.min must be positive on a log scale".into()));
        }
        Ok(())
    }

    /// Sweep values in order, endpoints included.
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.min];
        }
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                let f = i as f64 / last;
                match self.scale {
                    Scale::Linear => self.min + f * (self.max - self.min),
                    Scale::Log => (self.min.ln() + f * (self.max.ln() - self.min.ln())).exp(),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EchoConfig {
    /// Evaluation time in seconds; T_B when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<f64>,
    #[serde(default)]
    pub x0: f64,
    #[serde(default)]
    pub p0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_steps: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CausalityConfig {
    /// Alice's discrimination time in seconds; the sharp bound when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_a: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadiationConfig {
    /// Recombination time for the sin² path, seconds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t0: Option<f64>,
    /// Two-column `t, x` CSV replacing the sin² path (and its d and t0).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory_csv: Option<PathBuf>,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
}

fn default_kappa() -> f64 {
    crate::interference::DEFAULT_KAPPA
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VacuumConfig {
    /// Gaussian window width, seconds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width_t: Option<f64>,
    /// Two-column `t, phi` CSV replacing the Gaussian.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_csv: Option<PathBuf>,
    /// Frequency cutoff for the unaveraged variance, rad/s.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterferenceConfig {
    /// Single-packet width, metres.
    pub sigma: f64,
    /// Packet separation in metres; `scenario.alice.separation_d` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    #[serde(default)]
    pub phi: f64,
    #[serde(default = "default_samples")]
    pub n_samples: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Noise range as multiples of π/d.
    #[serde(default = "default_noise_min")]
    pub noise_min: f64,
    #[serde(default = "default_noise_max")]
    pub noise_max: f64,
    #[serde(default = "default_levels")]
    pub levels: usize,
}

fn default_samples() -> usize {
    10_000
}

fn default_trials() -> usize {
    200
}

fn default_noise_min() -> f64 {
    0.1
}

fn default_noise_max() -> f64 {
    10.0
}

fn default_levels() -> usize {
    10
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(sweep) = &self.sweep {
            sweep.validate()?;
        }
        self.constants()?;
        if let Some(r) = &self.radiation {
            if r.t0.is_some() == r.trajectory_csv.is_some() {
                return Err(Error::Config("radiation: give exactly one of `t0` and `trajectory_csv`".into()));
            }
        }
        if let Some(v) = &self.vacuum {
            if v.width_t.is_some() == v.window_csv.is_some() {
                return Err(Error::Config("vacuum: give exactly one of `width_t` and `window_csv`".into()));
            }
        }
        Ok(())
    }

    pub fn constants(&self) -> Result<PhysicalConstants> {
        match &self.constants {
            Some(o) => o.apply(PhysicalConstants::SI),
            None => Ok(PhysicalConstants::SI),
        }
    }

    /// One scenario per sweep point, or the base scenario alone.
    pub fn scenarios(&self) -> Vec<(Option<f64>, ScenarioConfig)> {
        match &self.sweep {
            None => vec![(None, self.scenario)],
            Some(s) => s.values().into_iter().map(|v| (Some(v), self.scenario.with(&s.parameter, v))).collect(),
        }
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"scenario": {"alice": {"kind": "mass", "magnitude": 5.97e24, "separation_d": 1e-6}}}"#;

    #[test]
    fn minimal_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.seed, 0);
        assert_eq!(c.scenario.sigma, None);
        assert_eq!(c.scenarios().len(), 1);
        assert_eq!(c.constants().unwrap(), PhysicalConstants::SI);
    }

    #[test]
    fn unknown_keys_named() {
        let bad = r#"{"scenario": {"alice": {"kind": "mass", "massE": 1.0, "magnitude": 1.0, "separation_d": 1.0}}}"#;
        let e = parse_config(bad).unwrap_err().to_string();
        assert!(e.contains("massE") && e.contains("line"), "{e}");
        let top = r#"{"scenario": {"alice": {"kind": "mass", "magnitude": 1.0, "separation_d": 1.0}}, "sed": 3}"#;
        assert!(parse_config(top).unwrap_err().to_string().contains("sed"));
        assert!(parse_config("{").is_err());
    }

    #[test]
    fn sweep_expansion() {
        let text = r#"{"scenario": {"alice": {"kind": "mass", "magnitude": 1.0, "separation_d": 1e-6}, "bob_mass": 1.0},
            "sweep": {"parameter": "R", "min": 1.0, "max": 100.0, "points": 50, "scale": "log"}}"#;
        let c = parse_config(text).unwrap();
        let s = c.scenarios();
        assert_eq!(s.len(), 50);
        assert_eq!(s[0].1.distance, Some(1.0));
        assert!((s[49].1.distance.unwrap() - 100.0).abs() < 1e-12);
        assert!((s[1].0.unwrap() / s[0].0.unwrap() - 100f64.powf(1.0 / 49.0)).abs() < 1e-12);
    }

    #[test]
    fn sweep_parameter_validated() {
        let text = r#"{"scenario": {"alice": {"kind": "mass", "magnitude": 1.0, "separation_d": 1e-6}},
            "sweep": {"parameter": "mass", "min": 1.0, "max": 2.0, "points": 2}}"#;
        assert!(parse_config(text).unwrap_err().to_string().contains("mass"));
        let text = r#"{"scenario": {"alice": {"kind": "mass", "magnitude": 1.0, "separation_d": 1e-6}},
            "sweep": {"parameter": "R", "min": 0.0, "max": 2.0, "points": 2, "scale": "log"}}"#;
        assert!(parse_config(text).is_err());
        let text = r#"{"scenario": {"alice": {"kind": "mass", "magnitude": 1.0, "separation_d": 1e-6}},
            "sweep": {"parameter": "alice.separation_d", "min": 1.0, "max": 2.0, "points": 3}}"#;
        let c = parse_config(text).unwrap();
        let d: Vec<f64> = c.scenarios().iter().map(|s| s.1.alice.separation_d).collect();
        assert_eq!(d, vec![1.0, 1.5, 2.0]);
    }

    #[test]
    fn constants_override() {
        let text = r#"{"scenario": {"alice": {"kind": "mass", "magnitude": 1.0, "separation_d": 1e-6}},
            "constants": {"G": 1e-10}}"#;
        let k = parse_config(text).unwrap().constants().unwrap();
        assert_eq!(k.g(), 1e-10);
        assert_eq!(k.c(), PhysicalConstants::SI.c());
        let bad = r#"{"scenario": {"alice": {"kind": "mass", "magnitude": 1.0, "separation_d": 1e-6}},
            "constants": {"c": -1}}"#;
        assert!(parse_config(bad).is_err());
    }

    #[test]
    fn exclusive_sections() {
        let text = r#"{"scenario": {"alice": {"kind": "charge", "magnitude": 1e-17, "separation_d": 1e-6}},
            "radiation": {}}"#;
        assert!(parse_config(text).is_err());
        let text = r#"{"scenario": {"alice": {"kind": "charge", "magnitude": 1e-17, "separation_d": 1e-6}},
            "vacuum": {"width_t": 1.0, "window_csv": "w.csv"}}"#;
        assert!(parse_config(text).is_err());
    }
}
