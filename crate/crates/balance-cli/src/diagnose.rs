//! The `diagnose cv` command: dispersion of the acquisition estimates under
//! re-drawn hypothesis pair sets.

use balance_core::{
    bald_point, edge_mask, pair_hypotheses, pool_deltas, EnsemblePairs, PredictionTensor,
};
use rand_chacha::ChaCha8Rng;

use crate::algorithms::subtensor;
use crate::config::RunConfig;
use crate::CliError;

pub struct CvRow {
    pub point: usize,
    pub delta_mean: f64,
    pub delta_std: f64,
    pub delta_cv: f64,
    pub bald_mean: f64,
    pub bald_std: f64,
    pub bald_cv: f64,
}

/// Estimates the discount score and BALD `repeats` times, each with a fresh
/// pair draw, and reports mean, standard deviation, and the coefficient of
/// variation per pool point. The CV of an all-zero estimate is reported
/// as 0.
pub fn coefficient_of_variation(
    pool_tensor: &PredictionTensor,
    ref_tensor: &PredictionTensor,
    repeats: usize,
    config: &RunConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<CvRow>, CliError> {
    if repeats < 2 {
        return Err(CliError::config(format!(
            "need at least 2 repeats, got {repeats}"
        )));
    }
    let tau = config.resolve_tau()?;
    let s = pool_tensor.num_hypotheses();
    let n = pool_tensor.num_points();
    let pool: Vec<usize> = (0..n).collect();
    let ref_labels = ref_tensor.hard_labels();

    let mut delta_runs: Vec<Vec<f64>> = Vec::with_capacity(repeats);
    let mut bald_runs: Vec<Vec<f64>> = Vec::with_capacity(repeats);
    for _ in 0..repeats {
        let drawn = pair_hypotheses(s, config.num_pairs, rng).map_err(CliError::from_core)?;
        let mask =
            edge_mask(drawn.pairs(), &ref_labels, tau).map_err(CliError::from_core)?;
        let pairs =
            EnsemblePairs::new(drawn.pairs().to_vec(), mask).map_err(CliError::from_core)?;
        delta_runs.push(pool_deltas(&pool, &pairs, pool_tensor).map_err(CliError::from_core)?);
        // score mutual information over the same 2K sampled hypotheses
        let members: Vec<usize> = pairs.pairs().iter().flat_map(|&(a, b)| [a, b]).collect();
        let member_tensor = subtensor(pool_tensor, &members);
        bald_runs.push(pool.iter().map(|&x| bald_point(x, &member_tensor)).collect());
    }

    let stats = |runs: &[Vec<f64>], point: usize| -> (f64, f64, f64) {
        let values: Vec<f64> = runs.iter().map(|r| r[point]).collect();
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
            / values.len() as f64;
        let std = var.max(0.0).sqrt();
        let cv = if mean == 0.0 { 0.0 } else { std / mean };
        (mean, std, cv)
    };

    Ok(pool
        .iter()
        .map(|&point| {
            let (delta_mean, delta_std, delta_cv) = stats(&delta_runs, point);
            let (bald_mean, bald_std, bald_cv) = stats(&bald_runs, point);
            CvRow {
                point,
                delta_mean,
                delta_std,
                delta_cv,
                bald_mean,
                bald_std,
                bald_cv,
            }
        })
        .collect())
}
