use serde::{Deserialize, Serialize};

use crate::engine::OptimizerKind;
use crate::error::{Error, Result};
use crate::report::validate_runs;

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_RUNS: usize = 3;

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn default_runs() -> usize {
    DEFAULT_RUNS
}

fn positive(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::contract(format!("{name} must be positive, got {value}")))
    }
}

/// Training budget of the mock model used to probe data learnability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearnabilityConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub optimizer: OptimizerKind,
    pub learning_rate: f64,
}

impl Default for LearnabilityConfig {
    fn default() -> Self {
        LearnabilityConfig {
            epochs: 20,
            batch_size: 32,
            optimizer: OptimizerKind::Adam,
            learning_rate: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataStageConfig {
    /// Largest tolerated ratio of the most to the least frequent class.
    pub imbalance_ratio_threshold: f64,
    /// Largest tolerated `max - min` of a feature column.
    pub scaling_range_threshold: f64,
    /// Largest tolerated `|mean|` of a feature column.
    pub scaling_mean_threshold: f64,
    pub learnability: LearnabilityConfig,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Run the learnability check even when structural errors were found.
    pub force_learnability: bool,
}

impl Default for DataStageConfig {
    fn default() -> Self {
        DataStageConfig {
            imbalance_ratio_threshold: 1.5,
            scaling_range_threshold: 20.0,
            scaling_mean_threshold: 5.0,
            learnability: LearnabilityConfig::default(),
            runs: DEFAULT_RUNS,
            seed: DEFAULT_SEED,
            force_learnability: false,
        }
    }
}

impl DataStageConfig {
    pub fn validate(&self) -> Result<()> {
        positive("imbalance_ratio_threshold", self.imbalance_ratio_threshold)?;
        positive("scaling_range_threshold", self.scaling_range_threshold)?;
        positive("scaling_mean_threshold", self.scaling_mean_threshold)?;
        positive("learnability.learning_rate", self.learnability.learning_rate)?;
        if self.learnability.epochs == 0 || self.learnability.batch_size == 0 {
            return Err(Error::contract("learnability epochs and batch_size must be at least 1"));
        }
        validate_runs(self.runs)
    }
}

/// Training budget of the dynamics analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DynamicsConfig {
    pub epochs: usize,
    pub batch_size: usize,
    /// Loss is sampled every this many epochs for the oscillation detector.
    pub sample_every: usize,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        DynamicsConfig {
            epochs: 60,
            batch_size: 32,
            sample_every: 5,
        }
    }
}

/// Which binary-classification output layers are accepted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BinaryOutputStrictness {
    /// Sigmoid with 1 or 2 units, or softmax with 2 units.
    #[default]
    Lenient,
    /// Sigmoid only.
    Strict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelStageConfig {
    pub lr_min: f64,
    pub lr_max: f64,
    pub dynamics: DynamicsConfig,
    pub oscillation_reversals: usize,
    pub oscillation_amplitude_fraction: f64,
    pub slow_convergence_fraction: f64,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub binary_output_strictness: BinaryOutputStrictness,
}

impl Default for ModelStageConfig {
    fn default() -> Self {
        ModelStageConfig {
            lr_min: 1e-6,
            lr_max: 1.0,
            dynamics: DynamicsConfig::default(),
            oscillation_reversals: 3,
            oscillation_amplitude_fraction: 0.10,
            slow_convergence_fraction: 0.05,
            runs: DEFAULT_RUNS,
            seed: DEFAULT_SEED,
            binary_output_strictness: BinaryOutputStrictness::Lenient,
        }
    }
}

impl ModelStageConfig {
    pub fn validate(&self) -> Result<()> {
        positive("lr_min", self.lr_min)?;
        positive("lr_max", self.lr_max)?;
        if self.lr_min >= self.lr_max {
            return Err(Error::contract(format!(
                "lr_min ({}) must be below lr_max ({})",
                self.lr_min, self.lr_max
            )));
        }
        if self.dynamics.sample_every == 0 {
            return Err(Error::contract("dynamics.sample_every must be at least 1"));
        }
        if self.dynamics.epochs == 0 || self.dynamics.batch_size == 0 {
            return Err(Error::contract("dynamics epochs and batch_size must be at least 1"));
        }
        if self.oscillation_reversals == 0 {
            return Err(Error::contract("oscillation_reversals must be at least 1"));
        }
        positive("oscillation_amplitude_fraction", self.oscillation_amplitude_fraction)?;
        positive("slow_convergence_fraction", self.slow_convergence_fraction)?;
        validate_runs(self.runs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        DataStageConfig::default().validate().unwrap();
        ModelStageConfig::default().validate().unwrap();
    }

    #[test]
    fn partial_json_keeps_defaults() {
        let c: DataStageConfig = serde_json::from_str(r#"{"imbalance_ratio_threshold": 2.0}"#).unwrap();
        assert_eq!(c.imbalance_ratio_threshold, 2.0);
        assert_eq!(c.scaling_range_threshold, 20.0);
        assert_eq!(c.runs, 3);
        assert_eq!(c.seed, 42);
        let m: ModelStageConfig =
            serde_json::from_str(r#"{"dynamics": {"epochs": 30}, "binary_output_strictness": "strict"}"#)
                .unwrap();
        assert_eq!(m.dynamics.epochs, 30);
        assert_eq!(m.dynamics.sample_every, 5);
        assert_eq!(m.binary_output_strictness, BinaryOutputStrictness::Strict);
    }

    #[test]
    fn invalid_configs_rejected() {
        let even = DataStageConfig { runs: 2, ..Default::default() };
        assert!(even.validate().is_err());
        let inverted = ModelStageConfig { lr_min: 1.0, lr_max: 0.1, ..Default::default() };
        assert!(inverted.validate().is_err());
        let zero = ModelStageConfig {
            dynamics: DynamicsConfig { sample_every: 0, ..Default::default() },
            ..Default::default()
        };
        assert!(zero.validate().is_err());
        assert!(serde_json::from_str::<DataStageConfig>(r#"{"bogus": 1}"#).is_err());
    }
}
