use std::fs;
use std::path::Path;

use ctgvd::corpus::MineConfig;
use ctgvd::localize::Explainer;
use ctgvd::neural::{HyperParams, SkipGramConfig, TrainConfig};
use ctgvd::pipeline::CtgOptions;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitKind {
    CrossProject,
    DevProcess,
}

pub fn default_explainer() -> Explainer {
    Explainer::Occlusion
}

fn default_split() -> SplitKind {
    SplitKind::CrossProject
}

fn default_ratio() -> f64 {
    0.8
}

fn default_min_count() -> usize {
    1
}

fn default_top_k() -> usize {
    5
}

/// Everything a run depends on. `seed` is mandatory and is pushed down into
/// every seeded component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    #[serde(default)]
    pub model: HyperParams,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub ctg: CtgOptions,
    #[serde(default)]
    pub mine: MineConfig,
    /// Pretrain embeddings with skip-gram when present.
    #[serde(default)]
    pub skipgram: Option<SkipGramConfig>,
    #[serde(default = "default_explainer")]
    pub explainer: Explainer,
    #[serde(default = "default_split")]
    pub split: SplitKind,
    #[serde(default = "default_ratio")]
    pub split_ratio: f64,
    #[serde(default = "default_min_count")]
    pub min_count: usize,
    #[serde(default = "default_top_k")]
    pub top_k: usize,
}

impl PipelineConfig {
    pub fn with_seed(seed: u64) -> Self {
        let mut c: PipelineConfig = toml::from_str(&format!("seed = {seed}")).expect("minimal config parses");
        c.apply_seed(seed);
        c
    }

    pub fn apply_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.model.seed = seed;
        self.train.seed = seed;
        if let Some(s) = &mut self.skipgram {
            s.seed = seed;
            s.dim = self.model.d_emb;
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let m = &self.model;
        let bad = |msg: &str| Err(CliError::config(msg));
        if m.layers == 0 || m.d_emb == 0 || m.d_hidden == 0 || m.mlp_hidden == 0 {
            return bad("model.layers and all widths must be positive");
        }
        if !(0.0..=1.0).contains(&m.threshold) {
            return bad("model.threshold must lie in [0, 1]");
        }
        if !m.leaky_slope.is_finite() {
            return bad("model.leaky_slope must be finite");
        }
        if self.train.batch == 0 || !(self.train.lr.is_finite() && self.train.lr >= 0.0) {
            return bad("train.batch must be positive and train.lr non-negative");
        }
        if !(self.split_ratio > 0.0 && self.split_ratio <= 1.0) {
            return bad("split_ratio must lie in (0, 1]");
        }
        Ok(())
    }
}

/// Reads the config file (if any), applies the `--seed` override and
/// validates. A seed must come from one of the two.
pub fn load(path: Option<&Path>, seed: Option<u64>) -> Result<Option<PipelineConfig>, CliError> {
    let mut cfg = match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            Some(toml::from_str::<PipelineConfig>(&text).map_err(|e| CliError::config(&e.to_string()))?)
        }
        None => seed.map(PipelineConfig::with_seed),
    };
    if let Some(c) = &mut cfg {
        let s = seed.unwrap_or(c.seed);
        c.apply_seed(s);
        c.validate()?;
    }
    Ok(cfg)
}
