//! Point-wise and exact batch acquisition scores.
//!
//! The central quantity is the pairwise disagreement discount for a batch
//! `x_{1:b}` under `K` hypothesis pairs:
//!
//! ```text
//! delta = sum_y  p_mix(y) * (1/K) * sum_k  active_k * (1 - lam_k(y) * lam'_k(y))
//! ```
//!
//! where `p_mix(y) = (1/2K) sum_k [p(y|w_k) + p(y|w'_k)]` mixes the joint
//! label probabilities of all pair members, and `lam_w(y) = p(y|w) /
//! max_y' p(y'|w)` is the likelihood ratio. Labels across batch points are
//! conditionally independent given the hypothesis, so joint probabilities
//! factorize into per-point products. Using the ratio rather than the raw
//! likelihood makes a constant (uniform, hypothesis-independent) predictive
//! row contribute exactly zero.
//!
//! Entropy-based baselines (`bald_point`, `batchbald_exact`) are measured in
//! bits.

use crate::ensemble::EnsemblePairs;
use crate::error::{BalanceError, Result};
use crate::tensor::PredictionTensor;

/// Probabilities are floored at this value inside likelihood-ratio
/// computations, so a ratio is never 0/0.
pub const PROB_FLOOR: f64 = 1e-12;

/// Exact enumeration refuses more than this many label configurations.
pub const CONFIG_ENUM_CAP: u64 = 1_000_000;

/// Shannon entropy in bits, with the `0 log 0 = 0` convention.
pub fn entropy_bits(probs: &[f64]) -> f64 {
    probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum()
}

/// Number of label configurations `C^b`, guarded by the enumeration cap.
pub fn config_count(num_classes: usize, batch_len: usize) -> Result<usize> {
    let configs = (num_classes as u128)
        .checked_pow(batch_len as u32)
        .unwrap_or(u128::MAX);
    if configs > CONFIG_ENUM_CAP as u128 {
        return Err(BalanceError::EnumerationCap {
            configs,
            cap: CONFIG_ENUM_CAP,
        });
    }
    Ok(configs as usize)
}

/// Likelihood ratio of a probability row: each entry divided by the row
/// maximum, after flooring at [`PROB_FLOOR`].
pub fn likelihood_ratio(row: &[f64]) -> Result<Vec<f64>> {
    let max = row.iter().cloned().fold(0.0, f64::max);
    if max <= 0.0 {
        return Err(BalanceError::InvalidTensor(
            "all-zero probability row".into(),
        ));
    }
    Ok(row.iter().map(|&p| p.max(PROB_FLOOR) / max).collect())
}

/// Joint label probabilities of one hypothesis over all `C^b` configurations
/// of the batch, ordered with the first batch point as the most significant
/// digit. Returns the joint table and its maximum (the product of per-point
/// row maxima).
fn joint_probs(tensor: &PredictionTensor, hypothesis: usize, batch: &[usize]) -> (Vec<f64>, f64) {
    let c = tensor.num_classes();
    let mut joint = vec![1.0f64];
    let mut max = 1.0f64;
    for &point in batch {
        let row = tensor.row(hypothesis, point);
        let mut next = Vec::with_capacity(joint.len() * c);
        for &prefix in &joint {
            for &p in row {
                next.push(prefix * p);
            }
        }
        joint = next;
        max *= row.iter().cloned().fold(0.0, f64::max);
    }
    (joint, max)
}

/// Exact batch score by full enumeration of label configurations.
///
/// Errors when `C^b` exceeds [`CONFIG_ENUM_CAP`]; the importance-sampled
/// path in the selection module covers larger batches.
pub fn balance_exact(
    batch: &[usize],
    pairs: &EnsemblePairs,
    tensor: &PredictionTensor,
) -> Result<f64> {
    if batch.is_empty() {
        return Err(BalanceError::Config("empty batch".into()));
    }
    let configs = config_count(tensor.num_classes(), batch.len())?;
    let k = pairs.len();
    let mut mixture = vec![0.0f64; configs];
    let mut discount = vec![0.0f64; configs];
    for (&(a, b), &active) in pairs.pairs().iter().zip(pairs.edge_active()) {
        let (ja, amax) = joint_probs(tensor, a, batch);
        let (jb, bmax) = joint_probs(tensor, b, batch);
        for cfg in 0..configs {
            mixture[cfg] += ja[cfg] + jb[cfg];
        }
        if active {
            for cfg in 0..configs {
                let lam_a = ja[cfg].max(PROB_FLOOR) / amax.max(PROB_FLOOR);
                let lam_b = jb[cfg].max(PROB_FLOOR) / bmax.max(PROB_FLOOR);
                discount[cfg] += 1.0 - lam_a * lam_b;
            }
        }
    }
    let norm = 1.0 / (2.0 * k as f64) / k as f64;
    Ok(mixture
        .iter()
        .zip(&discount)
        .map(|(m, d)| m * d)
        .sum::<f64>()
        * norm)
}

/// BALD score of a single point: mutual information between its label and
/// the hypothesis, in bits, over all hypotheses of the tensor.
pub fn bald_point(point: usize, tensor: &PredictionTensor) -> f64 {
    let s = tensor.num_hypotheses();
    let c = tensor.num_classes();
    let mut mean = vec![0.0f64; c];
    let mut cond = 0.0;
    for h in 0..s {
        let row = tensor.row(h, point);
        for (acc, &p) in mean.iter_mut().zip(row) {
            *acc += p;
        }
        cond += entropy_bits(row);
    }
    for m in mean.iter_mut() {
        *m /= s as f64;
    }
    (entropy_bits(&mean) - cond / s as f64).max(0.0)
}

/// Exact BatchBALD score: mutual information between the joint label vector
/// of the batch and the hypothesis, in bits, by full enumeration.
pub fn batchbald_exact(batch: &[usize], tensor: &PredictionTensor) -> Result<f64> {
    if batch.is_empty() {
        return Err(BalanceError::Config("empty batch".into()));
    }
    let configs = config_count(tensor.num_classes(), batch.len())?;
    let s = tensor.num_hypotheses();
    let mut mixture = vec![0.0f64; configs];
    let mut cond = 0.0;
    for h in 0..s {
        let (joint, _) = joint_probs(tensor, h, batch);
        for (acc, &p) in mixture.iter_mut().zip(&joint) {
            *acc += p;
        }
        // entropy of a product distribution is the sum of marginal entropies
        for &point in batch {
            cond += entropy_bits(tensor.row(h, point));
        }
    }
    for m in mixture.iter_mut() {
        *m /= s as f64;
    }
    Ok((entropy_bits(&mixture) - cond / s as f64).max(0.0))
}

/// Mean over classes of the standard deviation (over hypotheses) of the
/// class probability.
pub fn mean_std(point: usize, tensor: &PredictionTensor) -> f64 {
    let s = tensor.num_hypotheses() as f64;
    let c = tensor.num_classes();
    let mut total = 0.0;
    for class in 0..c {
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for h in 0..tensor.num_hypotheses() {
            let p = tensor.row(h, point)[class];
            sum += p;
            sumsq += p * p;
        }
        let mean = sum / s;
        total += (sumsq / s - mean * mean).max(0.0).sqrt();
    }
    total / c as f64
}

/// One minus the largest mean predictive probability.
pub fn variation_ratio(point: usize, tensor: &PredictionTensor) -> f64 {
    let s = tensor.num_hypotheses() as f64;
    let c = tensor.num_classes();
    let mut best = 0.0f64;
    for class in 0..c {
        let mut sum = 0.0;
        for h in 0..tensor.num_hypotheses() {
            sum += tensor.row(h, point)[class];
        }
        best = best.max(sum / s);
    }
    1.0 - best
}
