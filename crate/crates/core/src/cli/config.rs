//! Experiment configuration: key/value text with nested tables.

use serde::{Deserialize, Serialize};

use super::{CliError, Result};

/// Which pipeline a run executes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pipeline {
    Theorem1,
    Theorem2,
    PrimitivesSuite,
}

/// Task source: a builtin family or a task file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSource {
    /// "equality" or "random-total".
    #[serde(default)]
    pub builtin: Option<String>,
    /// Input bits for "equality".
    #[serde(default)]
    pub bits: Option<usize>,
    /// Alphabet sizes for "random-total".
    #[serde(default)]
    pub x_count: Option<usize>,
    #[serde(default)]
    pub y_count: Option<usize>,
    #[serde(default)]
    pub z_count: Option<usize>,
    /// Path to a task file (alternative to builtin).
    #[serde(default)]
    pub path: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistributionKind {
    /// Uniform over all cells (product).
    Uniform,
    /// Random product marginals derived from the seed.
    ProductRandom,
    /// Half mass on the diagonal, half on off-diagonal cells whose
    /// fingerprints are orthogonal; non-product. Fingerprint protocols
    /// only.
    EqualityCorrelated,
    /// Weights come from the task file.
    FromFile,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CodeKind {
    Parity,
    Hadamard,
    Truncation,
}

/// Protocol source: builtin fingerprint, seeded random, or a file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSource {
    /// "fingerprint", "random", or "file".
    pub source: String,
    #[serde(default)]
    pub path: Option<String>,
    /// Fingerprint code family.
    #[serde(default)]
    pub code: Option<CodeKind>,
    /// Codeword length for the truncation code.
    #[serde(default)]
    pub code_length: Option<usize>,
    #[serde(default)]
    pub min_relative_distance: Option<f64>,
    /// Random-protocol shape.
    #[serde(default)]
    pub message_dim: Option<usize>,
    #[serde(default)]
    pub entangled: Option<bool>,
    #[serde(default)]
    pub target_error: Option<f64>,
    #[serde(default)]
    pub max_attempts: Option<usize>,
}

/// Numeric parameters of a run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunParams {
    pub eta: f64,
    #[serde(default)]
    pub epsilon_declared: f64,
    /// "average" or "worst-case-y".
    #[serde(default = "default_mode")]
    pub mode: String,
    /// "none" or "per-snapshot".
    #[serde(default = "default_compression")]
    pub compression: String,
    /// Monte Carlo trials for end-to-end error measurement.
    pub trials: usize,
}

fn default_mode() -> String {
    "average".into()
}

fn default_compression() -> String {
    "none".into()
}

/// A full experiment description. The seed is mandatory; every derived
/// random choice flows from it.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub pipeline: Pipeline,
    pub task: TaskSource,
    #[serde(default = "default_distribution")]
    pub distribution: DistributionKind,
    pub protocol: Option<ProtocolSource>,
    pub params: Option<RunParams>,
}

fn default_distribution() -> DistributionKind {
    DistributionKind::Uniform
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: ExperimentConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        match self.pipeline {
            Pipeline::Theorem1 | Pipeline::Theorem2 => {
                let params = self
                    .params
                    .as_ref()
                    .ok_or_else(|| CliError::Config("params table is required".into()))?;
                if params.trials == 0 {
                    return Err(CliError::Config("params.trials must be positive".into()));
                }
                if !(params.eta > 0.0 && params.eta < 1.0) {
                    return Err(CliError::Config("params.eta must lie in (0,1)".into()));
                }
                if !["average", "worst-case-y"].contains(&params.mode.as_str()) {
                    return Err(CliError::Config(format!(
                        "params.mode '{}' is not average|worst-case-y",
                        params.mode
                    )));
                }
                if !["none", "per-snapshot"].contains(&params.compression.as_str()) {
                    return Err(CliError::Config(format!(
                        "params.compression '{}' is not none|per-snapshot",
                        params.compression
                    )));
                }
                if self.protocol.is_none() {
                    return Err(CliError::Config("protocol table is required".into()));
                }
            }
            Pipeline::PrimitivesSuite => {}
        }
        if let Some(p) = &self.protocol {
            if !["fingerprint", "random", "file"].contains(&p.source.as_str()) {
                return Err(CliError::Config(format!(
                    "protocol.source '{}' is not fingerprint|random|file",
                    p.source
                )));
            }
        }
        if self.task.builtin.is_none() && self.task.path.is_none() {
            return Err(CliError::Config("task needs builtin or path".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
seed = 42
pipeline = "theorem2"
distribution = "equality-correlated"

[task]
builtin = "equality"
bits = 3

[protocol]
source = "fingerprint"
code = "truncation"
code_length = 2
min_relative_distance = 0.0

[params]
eta = 0.1
trials = 10000
"#;

    #[test]
    fn sample_config_parses() {
        let config = ExperimentConfig::from_toml(SAMPLE).unwrap();
        assert_eq!(config.seed, 42);
        assert_eq!(config.pipeline, Pipeline::Theorem2);
        assert_eq!(config.distribution, DistributionKind::EqualityCorrelated);
        assert_eq!(config.task.bits, Some(3));
    }

    #[test]
    fn zero_trials_rejected() {
        let text = SAMPLE.replace("trials = 10000", "trials = 0");
        assert!(matches!(
            ExperimentConfig::from_toml(&text),
            Err(CliError::Config(_))
        ));
    }

    #[test]
    fn unknown_field_is_a_parse_error() {
        let text = SAMPLE.replace("eta = 0.1", "eta = 0.1\nbogus = 3");
        assert!(matches!(
            ExperimentConfig::from_toml(&text),
            Err(CliError::Parse(_))
        ));
    }

    #[test]
    fn config_echo_round_trips() {
        let config = ExperimentConfig::from_toml(SAMPLE).unwrap();
        let json = serde_json::to_string(&config).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), json);
    }
}
