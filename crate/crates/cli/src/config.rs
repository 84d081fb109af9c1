//! JSON run configurations. Every file carries `"schema": 1` and unknown
//! fields are rejected.

use std::fs;
use std::path::{Path, PathBuf};

use riskrates::dist::{load_samples, Column};
use riskrates::experiments::{ExperimentConfig, Objective, OptionPayoff};
use riskrates::{Distribution, RiskSpec, ScenarioSet, StrategySet};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

pub fn read<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    match value.get("schema").and_then(|v| v.as_u64()) {
        Some(v) if v == u64::from(SCHEMA_VERSION) => {}
        Some(v) => {
            return Err(CliError::Config(format!(
                "{}: unsupported schema version {v}",
                path.display()
            )))
        }
        None => {
            return Err(CliError::Config(format!(
                "{}: missing \"schema\": {SCHEMA_VERSION}",
                path.display()
            )))
        }
    }
    serde_json::from_value(value).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Relative paths in a config resolve against the config's directory.
fn resolve(base: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_owned()
    } else {
        base.parent().unwrap_or(Path::new(".")).join(path)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum Input {
    Dist(Distribution),
    Csv {
        path: PathBuf,
        #[serde(default = "first_column")]
        column: Column,
    },
}

fn first_column() -> Column {
    Column::Index(0)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateConfig {
    pub schema: u32,
    pub input: Input,
    pub risk: RiskSpec,
    /// Draw this many points when the input law is not finitely supported.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_size: Option<usize>,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_tol() -> f64 {
    1e-10
}

fn default_experiment_tol() -> f64 {
    1e-9
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineScenarios {
    pub weights: Vec<f64>,
    pub f: Vec<f64>,
    pub g: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum Scenarios {
    Inline(InlineScenarios),
    /// CSV with header `weight,f,g1..ge`.
    Csv { path: PathBuf },
}

impl Scenarios {
    pub fn load(&self, config_path: &Path) -> Result<ScenarioSet, CliError> {
        match self {
            Scenarios::Inline(s) => Ok(ScenarioSet::new(s.weights.clone(), s.f.clone(), s.g.clone())?),
            Scenarios::Csv { path } => {
                let path = resolve(config_path, path);
                let file = fs::File::open(&path)
                    .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
                Ok(ScenarioSet::read_csv(file)?)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HedgeConfig {
    pub schema: u32,
    pub scenarios: Scenarios,
    pub objective: Objective,
    /// Defaults to `{0}` in the scenario dimension.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategies: Option<StrategySet>,
    #[serde(default = "one")]
    pub restarts: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn one() -> usize {
    1
}

/// Experiment file for `rate`, `deviation` and `bias`. The seed comes from
/// the command line, not the file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    pub schema: u32,
    pub dist: Distribution,
    pub objective: Objective,
    #[serde(default)]
    pub options: Vec<OptionPayoff>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategies: Option<StrategySet>,
    pub n_grid: Vec<usize>,
    pub replications: usize,
    #[serde(default)]
    pub epsilons: Vec<f64>,
    #[serde(default = "default_experiment_tol")]
    pub tol: f64,
}

impl ExperimentFile {
    pub fn into_config(self, seed: u64) -> ExperimentConfig {
        let strategies = self
            .strategies
            .unwrap_or_else(|| StrategySet::zero(self.options.len()));
        ExperimentConfig {
            dist: self.dist,
            objective: self.objective,
            options: self.options,
            strategies,
            n_grid: self.n_grid,
            replications: self.replications,
            seed,
            epsilons: self.epsilons,
            tol: self.tol,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SharpnessConfig {
    pub schema: u32,
    pub eps: f64,
    pub n_grid: Vec<usize>,
    pub replications: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    pub schema: u32,
    pub scenarios: Scenarios,
    pub risk: RiskSpec,
    pub direction: Vec<f64>,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
}

fn default_t_max() -> f64 {
    1e4
}

fn default_steps() -> usize {
    13
}

impl EstimateConfig {
    pub fn load_input(&self, config_path: &Path, seed: u64) -> Result<(riskrates::Discrete, bool), CliError> {
        match &self.input {
            Input::Csv { path, column } => {
                let s = load_samples(resolve(config_path, path), column)?;
                Ok((riskrates::Discrete::from_sample(&s.values)?, false))
            }
            Input::Dist(d) => match (d.to_discrete(), self.sample_size) {
                (Some(law), _) => Ok((law?, false)),
                (None, Some(n)) => {
                    let s = riskrates::dist::sample(d, n, seed)?;
                    Ok((riskrates::Discrete::from_sample(&s.values)?, true))
                }
                (None, None) => Err(CliError::Config(format!(
                    "{} has no finite support; set \"sample_size\" or give a CSV sample",
                    d.descriptor()
                ))),
            },
        }
    }
}
