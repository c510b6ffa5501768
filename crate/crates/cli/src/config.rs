use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Gen,
    Stats,
    FitDelta,
    Fig1,
    Fig2,
    Fig3,
    QTable,
    PaperCheck,
    BuildRef,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Gen => "gen",
            Experiment::Stats => "stats",
            Experiment::FitDelta => "fit-delta",
            Experiment::Fig1 => "fig1",
            Experiment::Fig2 => "fig2",
            Experiment::Fig3 => "fig3",
            Experiment::QTable => "q-table",
            Experiment::PaperCheck => "paper-check",
            Experiment::BuildRef => "build-ref",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorFormat {
    #[default]
    Json,
    Binary,
}

/// Fully resolved settings of one run. Replaying a written manifest
/// through `--config` reproduces the run's data files byte for byte.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Ensemble, circuit or map spec string.
    pub spec: Option<String>,
    /// Operator files (JSON or binary) used instead of `spec`.
    pub inputs: Vec<PathBuf>,
    pub samples: usize,
    /// Each operator is raised to this power before analysis.
    pub power: u32,
    pub t_max: Option<u32>,
    pub seed: u64,
    pub out: PathBuf,
    pub reference: Option<PathBuf>,
    pub reference_dim: usize,
    pub samples_per_delta: usize,
    pub format: OperatorFormat,
    pub threads: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: Experiment::Stats,
            spec: None,
            inputs: Vec::new(),
            samples: 100,
            power: 1,
            t_max: None,
            seed: 1,
            out: PathBuf::from("out"),
            reference: None,
            reference_dim: 256,
            samples_per_delta: 50,
            format: OperatorFormat::Json,
            threads: None,
        }
    }
}

impl ExperimentConfig {
    /// Reads a config file; a run manifest is accepted too, in which case
    /// its embedded config is used.
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut value: serde_json::Value =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        if let Some(inner) = value.get_mut("config") {
            value = inner.take();
        }
        serde_json::from_value(value)
            .with_context(|| format!("invalid config in {}", path.display()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            bail!("samples must be >= 1");
        }
        if self.power == 0 {
            bail!("power must be >= 1");
        }
        if self.t_max == Some(0) {
            bail!("t_max must be >= 1");
        }
        if self.samples_per_delta == 0 {
            bail!("samples_per_delta must be >= 1");
        }
        if self.reference_dim < 2 {
            bail!("reference_dim must be >= 2");
        }
        if self.threads == Some(0) {
            bail!("threads must be >= 1");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_config_fills_defaults() {
        let c: ExperimentConfig =
            serde_json::from_str(r#"{"experiment":"fig3","seed":7}"#).unwrap();
        assert_eq!(c.experiment, Experiment::Fig3);
        assert_eq!(c.seed, 7);
        assert_eq!(c.samples, 100);
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"sede":7}"#).is_err());
    }

    #[test]
    fn manifest_wrapper_is_accepted() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        std::fs::write(
            &path,
            r#"{"code_version":"x","config":{"experiment":"q-table","samples":3}}"#,
        )
        .unwrap();
        let c = ExperimentConfig::load(&path).unwrap();
        assert_eq!((c.experiment, c.samples), (Experiment::QTable, 3));
    }

    #[test]
    fn validation() {
        assert!(ExperimentConfig::default().validate().is_ok());
        let bad = ExperimentConfig {
            samples: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
