use serde::{Deserialize, Serialize};

use crate::classifiers::DEFAULT_EPSILON_DIST;
use crate::error::{DriftMemError, Result};
use crate::sampling::SmoteConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Dam3Config {
    /// Neighbours for the kNN classifiers and the cleaning neighbourhoods.
    pub k: usize,
    /// Drift detector window; the STM shrinks to this size on drift.
    pub ws: usize,
    /// Window over which the submodels' balanced accuracy is tracked.
    pub ms: usize,
    /// KS test significance level.
    pub alpha: f64,
    pub max_stm: usize,
    pub max_ltm: usize,
    pub max_wm: usize,
    pub smote: SmoteConfig,
    pub epsilon_dist: f64,
    pub seed: u64,
}

impl Default for Dam3Config {
    fn default() -> Self {
        Dam3Config {
            k: 5,
            ws: 50,
            ms: 50,
            alpha: 0.01,
            max_stm: 1000,
            max_ltm: 2000,
            max_wm: 2000,
            smote: SmoteConfig::default(),
            epsilon_dist: DEFAULT_EPSILON_DIST,
            seed: 0,
        }
    }
}

fn invalid(msg: impl Into<String>) -> DriftMemError {
    DriftMemError::InvalidConfig(msg.into())
}

impl Dam3Config {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.ws == 0 || self.ms == 0 {
            return Err(invalid("k, ws and ms must be positive"));
        }
        if self.ms > self.max_stm {
            return Err(invalid("ms must not exceed max_stm"));
        }
        if self.ws >= self.max_stm {
            return Err(invalid("ws must be smaller than max_stm"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(invalid("alpha must lie in (0, 1)"));
        }
        let min_cap = 2 * self.k;
        if self.max_stm < min_cap || self.max_ltm < min_cap || self.max_wm < min_cap {
            return Err(invalid(format!("memory capacities must be at least 2k = {min_cap}")));
        }
        if self.smote.k_interp == 0 || self.smote.m_danger == 0 {
            return Err(invalid("SMOTE neighbour counts must be positive"));
        }
        if self.epsilon_dist.is_nan() || self.epsilon_dist <= 0.0 {
            return Err(invalid("epsilon_dist must be positive"));
        }
        Ok(())
    }
}

/// Settings of the dual-memory baseline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamKnnConfig {
    pub k: usize,
    /// Smallest STM size considered when adapting the STM length.
    pub min_stm: usize,
    pub max_stm: usize,
    pub max_ltm: usize,
    /// Steps between STM size adaptations.
    pub adapt_interval: usize,
    pub epsilon_dist: f64,
    pub seed: u64,
}

impl Default for SamKnnConfig {
    fn default() -> Self {
        SamKnnConfig::from(&Dam3Config::default())
    }
}

impl From<&Dam3Config> for SamKnnConfig {
    fn from(c: &Dam3Config) -> Self {
        SamKnnConfig {
            k: c.k,
            min_stm: c.ms,
            max_stm: c.max_stm,
            max_ltm: c.max_ltm,
            adapt_interval: c.ms,
            epsilon_dist: c.epsilon_dist,
            seed: c.seed,
        }
    }
}

impl SamKnnConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.min_stm == 0 || self.adapt_interval == 0 {
            return Err(invalid("k, min_stm and adapt_interval must be positive"));
        }
        if self.min_stm > self.max_stm {
            return Err(invalid("min_stm must not exceed max_stm"));
        }
        let min_cap = 2 * self.k;
        if self.max_stm < min_cap || self.max_ltm < min_cap {
            return Err(invalid(format!("memory capacities must be at least 2k = {min_cap}")));
        }
        if self.epsilon_dist.is_nan() || self.epsilon_dist <= 0.0 {
            return Err(invalid("epsilon_dist must be positive"));
        }
        Ok(())
    }
}
