//! Run configuration: JSON with explicit defaults.

use std::path::Path;

use balance_core::{Policy, SelectionConfig, TauSchedule};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Acquisition algorithms the CLI can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    /// Top-B points by the pairwise discount score.
    Balance,
    /// Greedy/clustered batch construction (the full dispatcher).
    BatchBalance,
    /// Power sampling over the discount scores.
    PowerBalance,
    /// Top-B points by mutual information.
    Bald,
    /// Power sampling over mutual-information scores.
    PowerBald,
    /// Greedy joint mutual information (exact enumeration, small B only).
    BatchBald,
    MeanStd,
    VariationRatio,
    Random,
    /// Discount score over an explicit farthest-first-traversal partition.
    BalancePartition,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    /// Acquisition batch size B.
    pub batch_size: usize,
    /// Hypothesis pair count K.
    pub num_pairs: usize,
    /// MC configuration samples M for the importance-sampled path.
    pub num_config_samples: usize,
    /// Power-distribution coldness.
    pub beta: f64,
    /// Batch sizes below this use exact enumeration.
    pub enumeration_threshold: usize,
    /// Batches at least this large take the clustering path.
    pub dispatch_threshold: usize,
    /// Candidate subset size factor c (|C| = round(c * B)).
    pub subsample_factor: f64,
    /// Lloyd iteration cap T.
    pub max_cluster_iters: usize,
    pub seed: u64,
    /// Edge threshold schedule.
    pub tau: TauSchedule,
    /// Validation error rate for annealed tau. `select` and `diagnose`
    /// run on tensors alone, so the error rate must be supplied here.
    pub epsilon: Option<f64>,
    /// Total labels a simulation may acquire.
    pub budget: Option<usize>,
    /// Target error tolerance for stylized policy scenarios.
    pub sigma: f64,
    /// Query policy for stylized scenarios.
    pub policy: Policy,
    /// When false (the default) the curve's `ms` column is written as 0 so
    /// re-runs are byte-identical.
    pub record_timings: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::BatchBalance,
            batch_size: 10,
            num_pairs: 8,
            num_config_samples: 10_000,
            beta: 1.0,
            enumeration_threshold: 4,
            dispatch_threshold: 50,
            subsample_factor: 2.0,
            max_cluster_iters: 5,
            seed: 0,
            tau: TauSchedule::Annealed { divisor: 4.0 },
            epsilon: None,
            budget: None,
            sigma: 0.125,
            policy: Policy::EcAware,
            record_timings: false,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let raw = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("reading {}: {e}", path.display())))?;
        let config: RunConfig = serde_json::from_str(&raw)
            .map_err(|e| CliError::config(format!("parsing {}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.selection()
            .validate()
            .map_err(|e| CliError::config(e.to_string()))?;
        if let Some(budget) = self.budget {
            if budget < self.batch_size && budget != 0 {
                return Err(CliError::config(format!(
                    "budget {budget} is below the batch size {}",
                    self.batch_size
                )));
            }
        }
        if let Some(eps) = self.epsilon {
            if !(0.0..=1.0).contains(&eps) {
                return Err(CliError::config(format!("epsilon {eps} outside [0, 1]")));
            }
        }
        if !(0.0..1.0).contains(&self.sigma) || self.sigma <= 0.0 {
            return Err(CliError::config(format!(
                "sigma {} outside (0, 1)",
                self.sigma
            )));
        }
        Ok(())
    }

    pub fn selection(&self) -> SelectionConfig {
        SelectionConfig {
            batch_size: self.batch_size,
            num_pairs: self.num_pairs,
            num_config_samples: self.num_config_samples,
            beta: self.beta,
            enumeration_threshold: self.enumeration_threshold,
            dispatch_threshold: self.dispatch_threshold,
            subsample_factor: self.subsample_factor,
            max_cluster_iters: self.max_cluster_iters,
            seed: self.seed,
        }
    }

    /// Resolves the edge threshold, requiring an error rate for annealing.
    pub fn resolve_tau(&self) -> Result<f64, CliError> {
        match self.tau {
            TauSchedule::Fixed { .. } => Ok(self.tau.resolve(0.0)),
            TauSchedule::Annealed { .. } => {
                let eps = self.epsilon.ok_or_else(|| {
                    CliError::config(
                        "annealed tau needs `epsilon` (the validation error rate) in the config"
                            .into(),
                    )
                })?;
                Ok(self.tau.resolve(eps))
            }
        }
    }
}
