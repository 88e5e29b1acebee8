use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rank::RankingConfig;
use crate::seqgen::{CountLaw, DegreeModelParams};

/// Power-iteration settings; the damping bound comes from the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RankingSettings {
    pub r0: f64,
    pub tolerance: f64,
    pub max_k: usize,
}

impl Default for RankingSettings {
    fn default() -> Self {
        Self { r0: 1.0, tolerance: 1e-10, max_k: 200 }
    }
}

/// Settings of the tail check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TailCheckConfig {
    pub model: DegreeModelParams,
    /// Replaces the in-degree law of root and branching nodes when set.
    pub count_law: Option<CountLaw>,
    pub samples: usize,
    pub generations: usize,
    pub top_fraction: f64,
    /// Quantile of the `ℛ*` sample at which the tail ratio is evaluated.
    pub quantile: f64,
}

impl Default for TailCheckConfig {
    fn default() -> Self {
        Self {
            // Pareto-like in-degrees whose power-law regime starts well inside
            // the top 5% of 10^5 samples.
            model: DegreeModelParams::pagerank(2.5, 2.5, 2.0, 0.8),
            count_law: Some(CountLaw::DiscretePareto { alpha: 2.5, scale: 2.0, zero_prob: 0.4 }),
            samples: 100_000,
            generations: 10,
            top_fraction: 0.05,
            quantile: 0.999,
        }
    }
}

/// A full experiment description. Every field has a default matching the
/// reference experiment, so a config file only lists what it changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: DegreeModelParams,
    pub n_values: Vec<usize>,
    pub replications: usize,
    pub wbp_generations: usize,
    /// Fixed tree depth; `None` uses `⌊ln n⌋`.
    pub tbt_depth: Option<usize>,
    pub master_seed: u64,
    /// Not echoed into reports so outputs do not depend on where they are written.
    #[serde(skip_serializing)]
    pub output_dir: PathBuf,
    pub ranking: RankingSettings,
    /// Rank nodes of a single graph per `n` instead of one graph per sample.
    pub reuse_graph: bool,
    /// Fraction of failed replications tolerated before aborting.
    pub failure_budget: f64,
    pub tree_node_cap: usize,
    pub tail: TailCheckConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            model: DegreeModelParams::reference_default(),
            n_values: vec![10, 100, 10_000],
            replications: 1000,
            wbp_generations: 10,
            tbt_depth: None,
            master_seed: 1,
            output_dir: PathBuf::from("out"),
            ranking: RankingSettings::default(),
            reuse_graph: false,
            failure_budget: 0.01,
            tree_node_cap: 20_000_000,
            tail: TailCheckConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    /// `k_n`: the configured depth or `⌊ln n⌋`.
    pub fn tbt_depth_for(&self, n: usize) -> usize {
        self.tbt_depth.unwrap_or_else(|| (n as f64).ln().floor().max(0.0) as usize)
    }

    pub fn ranking_config(&self) -> RankingConfig {
        RankingConfig {
            r0: self.ranking.r0,
            max_k: self.ranking.max_k,
            tolerance: self.ranking.tolerance,
            damping_bound: self.model.damping_bound(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.n_values.is_empty() || self.n_values.contains(&0) {
            return Err(invalid("n_values must be a nonempty list of positive sizes"));
        }
        if self.n_values.iter().any(|&n| n > u32::MAX as usize / 2) {
            return Err(invalid("graph size too large"));
        }
        if self.replications < 2 {
            return Err(invalid(format!("replications must be at least 2, got {}", self.replications)));
        }
        if !(0.0..1.0).contains(&self.failure_budget) {
            return Err(invalid("failure_budget must lie in [0, 1)"));
        }
        self.ranking_config().validate()?;
        self.validate_tail()
    }

    pub fn validate_tail(&self) -> Result<()> {
        let t = &self.tail;
        t.model.validate()?;
        if t.samples < 2 {
            return Err(invalid("tail samples must be at least 2"));
        }
        if !(t.top_fraction > 0.0 && t.top_fraction <= 0.2) {
            return Err(invalid("tail top_fraction must lie in (0, 0.2]"));
        }
        if !(t.quantile > 0.0 && t.quantile < 1.0) {
            return Err(invalid("tail quantile must lie in (0, 1)"));
        }
        Ok(())
    }
}
