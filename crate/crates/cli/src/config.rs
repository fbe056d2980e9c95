//! Run configuration: a TOML file whose values are overridden by command-line
//! flags. The fully resolved configuration is written next to each primary
//! output so that the run can be repeated with `--config`.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use edgehealth::explain::DEFAULT_BACKGROUND;
use edgehealth::gbdt::BoostHyperparams;
use serde::{Deserialize, Serialize};

use crate::cli::Baseline;

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Command that produced this file; informational only.
    pub command: Option<String>,
    pub seed: u64,
    pub paths: Paths,
    pub generator: GeneratorConfig,
    pub boost: BoostConfig,
    pub explain: ExplainConfig,
    pub evaluate: EvaluateConfig,
    pub report: ReportConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: None,
            seed: DEFAULT_SEED,
            paths: Paths::default(),
            generator: GeneratorConfig::default(),
            boost: BoostConfig::default(),
            explain: ExplainConfig::default(),
            evaluate: EvaluateConfig::default(),
            report: ReportConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub data: Option<PathBuf>,
    pub train: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub background: Option<PathBuf>,
    pub shap: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub test_out: Option<PathBuf>,
    pub log: Option<PathBuf>,
    pub outdir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    pub samples: usize,
    pub anomaly_rate: f64,
    /// When set, the generated data is split and the test part written to
    /// `paths.test_out`.
    pub test_fraction: Option<f64>,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            samples: 10_000,
            anomaly_rate: 0.3,
            test_fraction: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoostConfig {
    pub trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub min_child_hessian: f64,
}

impl Default for BoostConfig {
    fn default() -> Self {
        let d = BoostHyperparams::<f64>::default();
        Self {
            trees: d.num_rounds,
            max_depth: d.max_depth,
            learning_rate: d.learning_rate,
            lambda: d.lambda,
            gamma: d.gamma,
            min_child_hessian: d.min_child_hessian,
        }
    }
}

impl BoostConfig {
    pub fn hyperparams(&self, seed: u64) -> BoostHyperparams<f64> {
        BoostHyperparams {
            num_rounds: self.trees,
            max_depth: self.max_depth,
            learning_rate: self.learning_rate,
            lambda: self.lambda,
            gamma: self.gamma,
            min_child_hessian: self.min_child_hessian,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExplainConfig {
    pub background_size: usize,
    /// Explain only this sample.
    pub sample: Option<usize>,
}

impl Default for ExplainConfig {
    fn default() -> Self {
        Self {
            background_size: DEFAULT_BACKGROUND,
            sample: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluateConfig {
    pub model_name: String,
    pub baselines: Vec<Baseline>,
    pub k: usize,
    /// `name=path` pairs of prediction files from other tools.
    pub external: Vec<String>,
}

impl Default for EvaluateConfig {
    fn default() -> Self {
        Self {
            model_name: "XGBoost".into(),
            baselines: Vec::new(),
            k: 5,
            external: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportConfig {
    pub dependence_feature: String,
    /// Picked automatically when unset.
    pub color_feature: Option<String>,
}

impl Default for ReportConfig {
    fn default() -> Self {
        Self {
            dependence_feature: "cpu_usage".into(),
            color_feature: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string_pretty(self)?)
    }
}

/// Where the resolved configuration of a run writing `primary` is echoed:
/// `data.csv` gets `data.csv.config.toml`, an output directory `report/`
/// gets the sibling `report.config.toml`.
pub fn echo_path(primary: &Path) -> PathBuf {
    let mut name = primary
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_else(|| "run".into());
    name.push(".config.toml");
    primary.with_file_name(name)
}
