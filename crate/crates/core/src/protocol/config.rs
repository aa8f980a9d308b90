use std::f64::consts::FRAC_PI_4;

use serde::{Deserialize, Serialize};

use super::ProtocolError;
use crate::analytics::epsilon_bias;
use crate::angmom::{ChshAngles, PolarizationAngle};

/// How a trial's outcomes are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SourceModel {
    /// Evolve the two-photon state vector through every measurement.
    #[serde(rename = "physical")]
    Physical,
    /// Sample the idealized branching model directly.
    #[serde(rename = "paper-ideal")]
    PaperIdeal,
}

impl std::str::FromStr for SourceModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "physical" => Ok(SourceModel::Physical),
            "paper-ideal" => Ok(SourceModel::PaperIdeal),
            other => Err(format!(
                "unknown source model '{other}' (expected physical or paper-ideal)"
            )),
        }
    }
}

impl std::fmt::Display for SourceModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SourceModel::Physical => "physical",
            SourceModel::PaperIdeal => "paper-ideal",
        })
    }
}

/// Analyzer settings used on Bell rounds. Half of the Bell rounds go to one
/// of the four CHSH pairs, the other half to a sweep of Bob's analyzer with
/// Alice's fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BellSettings {
    pub chsh: ChshAngles,
    pub theta_fixed: PolarizationAngle,
    pub sweep_points: u32,
}

impl Default for BellSettings {
    fn default() -> Self {
        Self {
            chsh: ChshAngles::canonical(),
            theta_fixed: PolarizationAngle::new(FRAC_PI_4),
            sweep_points: 36,
        }
    }
}

impl BellSettings {
    pub fn sweep_angle(&self, index: u32) -> PolarizationAngle {
        PolarizationAngle::new(index as f64 * std::f64::consts::PI / self.sweep_points as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub l0: u32,
    pub eta: f64,
    pub trials: u64,
    pub seed: u64,
    pub source_model: SourceModel,
    pub bell_fraction: f64,
    pub disclose_fraction: f64,
    #[serde(default)]
    pub epsilon_override: Option<f64>,
    #[serde(default)]
    pub bell: BellSettings,
}

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_BELL_FRACTION: f64 = 0.1;
pub const DEFAULT_DISCLOSE_FRACTION: f64 = 0.1;

impl ProtocolConfig {
    /// Paper-ideal model, seed 42, 10% Bell rounds, 10% disclosure.
    pub fn new(l0: u32, eta: f64, trials: u64) -> Result<Self, ProtocolError> {
        let cfg = Self {
            l0,
            eta,
            trials,
            seed: DEFAULT_SEED,
            source_model: SourceModel::PaperIdeal,
            bell_fraction: DEFAULT_BELL_FRACTION,
            disclose_fraction: DEFAULT_DISCLOSE_FRACTION,
            epsilon_override: None,
            bell: BellSettings::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_model(mut self, model: SourceModel) -> Self {
        self.source_model = model;
        self
    }

    pub fn with_bell_fraction(mut self, f: f64) -> Self {
        self.bell_fraction = f;
        self
    }

    pub fn with_disclose_fraction(mut self, f: f64) -> Self {
        self.disclose_fraction = f;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon_override = Some(epsilon);
        self
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        let bad = |msg: String| Err(ProtocolError::InvalidConfig(msg));
        if self.l0 == 0 {
            return bad("l0 must be at least 1".into());
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        for (name, v) in [
            ("eta", self.eta),
            ("bell_fraction", self.bell_fraction),
            ("disclose_fraction", self.disclose_fraction),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} = {v} is outside [0, 1]"));
            }
        }
        if self.bell.sweep_points == 0 {
            return bad("sweep_points must be at least 1".into());
        }
        let eps = self.epsilon()?;
        if !(0.0..0.5).contains(&eps) {
            return bad(format!("epsilon = {eps} is outside [0, 1/2)"));
        }
        Ok(())
    }

    /// Variable-choice bias; defaults to the value that equalizes key-symbol
    /// probabilities.
    pub fn epsilon(&self) -> Result<f64, ProtocolError> {
        match self.epsilon_override {
            Some(e) => Ok(e),
            None => Ok(epsilon_bias(self.l0)?),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_values() {
        assert!(ProtocolConfig::new(1, 0.5, 0).is_err());
        assert!(ProtocolConfig::new(0, 0.5, 10).is_err());
        assert!(ProtocolConfig::new(1, 1.5, 10).is_err());
        let cfg = ProtocolConfig::new(1, 0.5, 10).unwrap();
        assert!(cfg.clone().with_bell_fraction(-0.1).validate().is_err());
        assert!(cfg.clone().with_epsilon(0.5).validate().is_err());
        assert!(cfg.with_epsilon(0.0).validate().is_ok());
    }

    #[test]
    fn default_epsilon() {
        let cfg = ProtocolConfig::new(1, 0.0, 1).unwrap();
        assert!((cfg.epsilon().unwrap() - 1.0 / 14.0).abs() < 1e-15);
    }

    #[test]
    fn model_names() {
        assert_eq!(
            "paper-ideal".parse::<SourceModel>(),
            Ok(SourceModel::PaperIdeal)
        );
        assert_eq!(SourceModel::Physical.to_string(), "physical");
        assert!("ideal".parse::<SourceModel>().is_err());
    }
}
