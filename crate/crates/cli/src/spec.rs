//! Experiment configuration: a flat JSON document with model-parameter
//! ranges, horizons, strategies, and trial counts. Unknown keys are
//! rejected.

use anyhow::{bail, Context, Result};
use recsim_core::algorithm::StrategyTag;
use serde::Deserialize;

fn default_gamma() -> f64 {
    0.5
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub n_users: Vec<usize>,
    pub n_user_types: Vec<usize>,
    pub n_item_types: Vec<usize>,
    /// Fixed horizons to run; each gets its own set of trials.
    pub horizons: Vec<u64>,
    /// Horizon subset at which the regret curve is reported. Empty means
    /// "each horizon itself".
    #[serde(default)]
    pub checkpoints: Vec<u64>,
    pub strategies: Vec<String>,
    pub trials: u64,
    pub base_seed: u64,
    /// Cold-start slope threshold.
    #[serde(default = "default_gamma")]
    pub gamma: f64,
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ExperimentSpec =
            serde_json::from_str(text).context("parsing experiment config")?;
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            bail!("trials must be >= 1");
        }
        if self.strategies.is_empty() {
            bail!("strategies must be nonempty");
        }
        self.parsed_strategies()?;
        for axis in [&self.n_users, &self.n_user_types, &self.n_item_types] {
            if axis.is_empty() {
                bail!("model parameter lists must be nonempty");
            }
            if axis.contains(&0) {
                bail!("model parameters must be >= 1");
            }
        }
        if self.horizons.is_empty() || self.horizons.contains(&0) {
            bail!("horizons must be nonempty and >= 1");
        }
        let max_t = *self.horizons.iter().max().unwrap();
        if self.checkpoints.iter().any(|&c| c == 0 || c > max_t) {
            bail!("checkpoints must lie in [1, max horizon]");
        }
        Ok(())
    }

    pub fn parsed_strategies(&self) -> Result<Vec<StrategyTag>> {
        self.strategies
            .iter()
            .map(|s| {
                s.parse::<StrategyTag>()
                    .map_err(|e| anyhow::anyhow!("{e}"))
            })
            .collect()
    }

    /// Checkpoints for a given horizon: the configured subset clipped to
    /// the horizon, or just the horizon itself.
    pub fn checkpoints_for(&self, horizon: u64) -> Vec<u64> {
        if self.checkpoints.is_empty() {
            vec![horizon]
        } else {
            let mut cps: Vec<u64> = self
                .checkpoints
                .iter()
                .copied()
                .filter(|&c| c <= horizon)
                .collect();
            cps.sort_unstable();
            cps.dedup();
            if cps.is_empty() {
                vec![horizon]
            } else {
                cps
            }
        }
    }
}
