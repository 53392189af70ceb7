use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::RandomGraphParams;
use crate::nonlinearity::ProfileSpec;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Gen,
    Analyze,
    Frustration,
    SimulateCt,
    SimulateDt,
    SweepCt,
    SweepDt,
    Ensemble,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Gen => "gen",
            Mode::Analyze => "analyze",
            Mode::Frustration => "frustration",
            Mode::SimulateCt => "simulate-ct",
            Mode::SimulateDt => "simulate-dt",
            Mode::SweepCt => "sweep-ct",
            Mode::SweepDt => "sweep-dt",
            Mode::Ensemble => "ensemble",
        }
    }
}

/// A graph file, or generator parameters plus seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSource {
    File(PathBuf),
    Generate(GeneratorSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub n: usize,
    pub edge_prob: f64,
    pub negative_prob: f64,
    pub weight_low: Option<f64>,
    pub weight_high: Option<f64>,
    pub max_attempts: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    /// Rescale `|A|` to this constant row sum.
    pub regularize: Option<f64>,
}

impl GeneratorSpec {
    pub fn params(&self) -> RandomGraphParams {
        let mut p = RandomGraphParams::new(self.n, self.edge_prob, self.negative_prob);
        if let Some(v) = self.weight_low {
            p.weight_low = v;
        }
        if let Some(v) = self.weight_high {
            p.weight_high = v;
        }
        if let Some(v) = self.max_attempts {
            p.max_attempts = v;
        }
        p
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub newton_tol: Option<f64>,
    pub dedup_radius: Option<f64>,
    pub dt_tol: Option<f64>,
    pub stop_tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    pub count: usize,
    pub n: usize,
    pub edge_prob: f64,
    pub betas: Vec<f64>,
    #[serde(default)]
    pub weight_low: Option<f64>,
    #[serde(default)]
    pub weight_high: Option<f64>,
    #[serde(default)]
    pub regularize: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    pub json: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub graph: Option<PathBuf>,
}

/// Everything a run needs; command-line flags override these fields.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub mode: Option<Mode>,
    pub graph: Option<GraphSource>,
    pub profile: Option<ProfileSpec>,
    pub pi: Option<f64>,
    pub eps_step: Option<f64>,
    /// `start:step:end`.
    pub grid: Option<String>,
    pub seeds: Option<usize>,
    pub seed: Option<u64>,
    pub horizon: Option<f64>,
    pub step: Option<f64>,
    pub iters: Option<usize>,
    /// `zero`, `random`, or a path to a JSON array.
    pub x0: Option<String>,
    pub restarts: Option<usize>,
    pub exact: Option<bool>,
    pub exact_cap: Option<usize>,
    #[serde(default)]
    pub tolerances: Tolerances,
    pub ensemble: Option<EnsembleSpec>,
    #[serde(default)]
    pub outputs: Outputs,
}

impl ExperimentConfig {
    pub fn from_json(text: &str, context: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Parse {
            context: context.to_string(),
            message: e.to_string(),
        })?;
        if cfg.schema != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "{context}: unsupported schema {} (expected {SCHEMA_VERSION})",
                cfg.schema
            )));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text, &path.display().to_string())
    }
}
