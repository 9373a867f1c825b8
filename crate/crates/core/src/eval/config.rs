use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::gft::DEFAULT_RANK_TOL;
use crate::neural::{DecoderConfig, TrainConfig};
use crate::sim::VariantSpec;

fn default_rank_tol() -> f64 {
    DEFAULT_RANK_TOL
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn default_thresholds() -> Vec<usize> {
    vec![1]
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariantSection {
    pub rates_mg_s: Vec<f64>,
    pub durations_s: Vec<f64>,
    #[serde(default = "start_zero")]
    pub starts_s: Vec<f64>,
    pub timestep_s: f64,
    pub max_steps: usize,
}

fn start_zero() -> Vec<f64> {
    vec![0.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanSection {
    /// Node budgets as fractions of the junction count.
    pub budgets: Vec<f64>,
    #[serde(default = "default_thresholds")]
    pub gft_frequent_thresholds: Vec<usize>,
    #[serde(default)]
    pub gft_important_n: Vec<usize>,
    #[serde(default = "default_true")]
    pub laplacian: bool,
    #[serde(default = "default_true")]
    pub random: bool,
}

/// Experiment description, read from TOML.
///
/// ```toml
/// network = "looped30.inp"   # relative to the config file
/// sources = ["J2", "J3"]
/// seeds = [0, 1, 2]
///
/// [variants]
/// rates_mg_s = [50.0, 80.0]
/// durations_s = [600.0, 1200.0]
/// timestep_s = 60.0
/// max_steps = 5000
///
/// [plans]
/// budgets = [0.3, 0.5, 0.75]
///
/// [decoder]
/// epochs = 200
/// learning_rate = 0.003
/// batch_size = 32
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub network: PathBuf,
    pub sources: Vec<String>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_rank_tol")]
    pub rank_tol: f64,
    pub variants: VariantSection,
    pub plans: PlanSection,
    #[serde(default)]
    pub decoder: DecoderSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoderSection {
    #[serde(default)]
    pub hidden: Option<Vec<usize>>,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
}

impl Default for DecoderSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        DecoderSection {
            hidden: None,
            epochs: t.epochs,
            learning_rate: t.learning_rate,
            batch_size: t.batch_size,
        }
    }
}

impl DecoderSection {
    pub fn config(&self, seed: u64) -> DecoderConfig {
        DecoderConfig {
            hidden: self.hidden.clone(),
            train: TrainConfig {
                epochs: self.epochs,
                learning_rate: self.learning_rate,
                batch_size: self.batch_size,
                seed,
            },
        }
    }
}

impl PipelineConfig {
    /// Parses TOML; a relative `network` path is resolved against `base`.
    pub fn from_toml(text: &str, base: Option<&Path>) -> Result<Self> {
        let mut cfg: PipelineConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if let Some(base) = base {
            if cfg.network.is_relative() {
                cfg.network = base.join(&cfg.network);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text, path.parent())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.sources.is_empty() {
            return bad("sources must not be empty".into());
        }
        if self.seeds.is_empty() {
            return bad("seeds must not be empty".into());
        }
        let v = &self.variants;
        if v.rates_mg_s.is_empty() || v.durations_s.is_empty() || v.starts_s.is_empty() {
            return bad("variants need at least one rate, duration and start".into());
        }
        if let Some(b) = self.plans.budgets.iter().find(|&&b| !(b > 0.0 && b <= 1.0)) {
            return bad(format!("budget fraction {b} outside (0, 1]"));
        }
        if self.plans.gft_frequent_thresholds.contains(&0) || self.plans.gft_important_n.contains(&0) {
            return bad("plan thresholds and n values start at 1".into());
        }
        if !(self.rank_tol > 0.0 && self.rank_tol < 1.0) {
            return bad(format!("rank_tol {} outside (0, 1)", self.rank_tol));
        }
        let d = &self.decoder;
        if d.epochs == 0 || d.batch_size == 0 || !(d.learning_rate > 0.0) {
            return bad("decoder epochs, batch_size and learning_rate must be positive".into());
        }
        Ok(())
    }

    pub fn variant_spec(&self) -> VariantSpec {
        VariantSpec {
            rates: self.variants.rates_mg_s.clone(),
            durations: self.variants.durations_s.clone(),
            starts: self.variants.starts_s.clone(),
            timestep: self.variants.timestep_s,
            max_steps: self.variants.max_steps,
        }
    }

    /// Integer node budget for a fraction of `n` junctions, at least one node.
    pub fn budget_nodes(fraction: f64, n: usize) -> usize {
        ((fraction * n as f64).round() as usize).clamp(1, n)
    }

    /// SHA-256 of the canonical JSON form of the configuration, with the
    /// network path reduced to its file name so the hash does not depend on
    /// where the files live.
    pub fn hash(&self) -> Result<String> {
        let mut canon = self.clone();
        if let Some(name) = self.network.file_name() {
            canon.network = PathBuf::from(name);
        }
        let bytes = serde_json::to_vec(&canon)?;
        Ok(hex::encode(Sha256::digest(&bytes)))
    }
}
