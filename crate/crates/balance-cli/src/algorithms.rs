//! Shared acquisition dispatch used by `select` and `simulate`.

use balance_core::{
    bald_point, balance_exact, batchbald_exact, fft_cluster, induced_edges, mean_std,
    partition_delta, pool_deltas, power_sample, select_batch, variation_ratio, EnsemblePairs,
    PredictionTensor, SelectionConfig,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::config::Algorithm;
use crate::CliError;

/// A selected batch with one score per pick (the point score under the
/// algorithm's criterion; marginal batch gains for greedy algorithms;
/// zero for random picks).
pub struct Selection {
    pub indices: Vec<usize>,
    pub scores: Vec<f64>,
}

/// Everything one acquisition round needs besides the RNG.
pub struct Round<'a> {
    /// Candidate point indices into `tensor`.
    pub pool: &'a [usize],
    pub pairs: &'a EnsemblePairs,
    /// Predictions on the candidate pool.
    pub tensor: &'a PredictionTensor,
    /// Predictions on the reference set (drives the partition variant).
    pub ref_tensor: &'a PredictionTensor,
    pub config: &'a SelectionConfig,
    pub tau: f64,
}

/// Runs one acquisition round.
pub fn run_algorithm(
    algorithm: Algorithm,
    round: &Round<'_>,
    rng: &mut ChaCha8Rng,
) -> Result<Selection, CliError> {
    let Round {
        pool,
        pairs,
        tensor,
        ref_tensor,
        config,
        tau,
    } = *round;
    if pool.is_empty() {
        return Err(CliError::config("pool is empty".into()));
    }
    if config.batch_size > pool.len() {
        return Err(CliError::config(format!(
            "batch size {} exceeds pool size {}",
            config.batch_size,
            pool.len()
        )));
    }
    let b = config.batch_size;
    match algorithm {
        Algorithm::Balance => {
            let scores = pool_deltas(pool, pairs, tensor).map_err(CliError::from_core)?;
            Ok(top_b(pool, &scores, b))
        }
        Algorithm::BatchBalance => {
            let indices =
                select_batch(pool, pairs, tensor, config, rng).map_err(CliError::from_core)?;
            let scores = indices
                .iter()
                .map(|&x| balance_exact(&[x], pairs, tensor))
                .collect::<Result<_, _>>()
                .map_err(CliError::from_core)?;
            Ok(Selection { indices, scores })
        }
        Algorithm::PowerBalance => {
            let scores = pool_deltas(pool, pairs, tensor).map_err(CliError::from_core)?;
            Ok(powered(pool, &scores, config.beta, b, rng))
        }
        Algorithm::Bald => {
            let scores: Vec<f64> = pool.iter().map(|&x| bald_point(x, tensor)).collect();
            Ok(top_b(pool, &scores, b))
        }
        Algorithm::PowerBald => {
            let scores: Vec<f64> = pool.iter().map(|&x| bald_point(x, tensor)).collect();
            Ok(powered(pool, &scores, config.beta, b, rng))
        }
        Algorithm::BatchBald => batchbald_greedy(pool, tensor, b),
        Algorithm::MeanStd => {
            let scores: Vec<f64> = pool.iter().map(|&x| mean_std(x, tensor)).collect();
            Ok(top_b(pool, &scores, b))
        }
        Algorithm::VariationRatio => {
            let scores: Vec<f64> = pool.iter().map(|&x| variation_ratio(x, tensor)).collect();
            Ok(top_b(pool, &scores, b))
        }
        Algorithm::Random => {
            let picks = rand::seq::index::sample(rng, pool.len(), b);
            Ok(Selection {
                indices: picks.iter().map(|i| pool[i]).collect(),
                scores: vec![0.0; b],
            })
        }
        Algorithm::BalancePartition => partition_scores(pool, pairs, tensor, ref_tensor, tau, b)
    }
}

fn top_b(pool: &[usize], scores: &[f64], b: usize) -> Selection {
    let mut order: Vec<usize> = (0..pool.len()).collect();
    order.sort_by(|&i, &j| {
        scores[j]
            .partial_cmp(&scores[i])
            .unwrap()
            .then(pool[i].cmp(&pool[j]))
    });
    let indices: Vec<usize> = order.iter().take(b).map(|&i| pool[i]).collect();
    let scores = order.iter().take(b).map(|&i| scores[i]).collect();
    Selection { indices, scores }
}

fn powered<R: Rng>(pool: &[usize], scores: &[f64], beta: f64, b: usize, rng: &mut R) -> Selection {
    let picks = power_sample(scores, beta, b, rng);
    Selection {
        indices: picks.iter().map(|&i| pool[i]).collect(),
        scores: picks.iter().map(|&i| scores[i]).collect(),
    }
}

fn batchbald_greedy(pool: &[usize], tensor: &PredictionTensor, b: usize) -> Result<Selection, CliError> {
    let mut indices: Vec<usize> = Vec::with_capacity(b);
    let mut scores = Vec::with_capacity(b);
    for _ in 0..b {
        let mut best: Option<(usize, f64)> = None;
        for &x in pool.iter().filter(|x| !indices.contains(x)) {
            let mut batch = indices.clone();
            batch.push(x);
            let score = batchbald_exact(&batch, tensor).map_err(CliError::from_core)?;
            let better = match best {
                None => true,
                Some((bx, bs)) => score > bs || (score == bs && x < bx),
            };
            if better {
                best = Some((x, score));
            }
        }
        let (x, score) = best.expect("pool checked non-empty");
        indices.push(x);
        scores.push(score);
    }
    Ok(Selection { indices, scores })
}

/// Partition-variant scoring: FFT over the pair members' reference
/// predictions, cross-class edges, then the per-point edge-discount score.
fn partition_scores(
    pool: &[usize],
    pairs: &EnsemblePairs,
    tensor: &PredictionTensor,
    ref_labels_tensor: &PredictionTensor,
    tau: f64,
    b: usize,
) -> Result<Selection, CliError> {
    let members: Vec<usize> = pairs.pairs().iter().flat_map(|&(a, c)| [a, c]).collect();
    let member_pool = subtensor(tensor, &members);
    let member_ref = subtensor(ref_labels_tensor, &members);
    let partition = fft_cluster(&member_ref.hard_labels(), tau, 0);
    let edges = induced_edges(&partition);
    let scores: Vec<f64> = pool
        .iter()
        .map(|&x| partition_delta(x, &edges, &member_pool, None))
        .collect::<Result<_, _>>()
        .map_err(CliError::from_core)?;
    Ok(top_b(pool, &scores, b))
}

/// Copies the given hypothesis rows into a standalone tensor.
pub fn subtensor(tensor: &PredictionTensor, hypotheses: &[usize]) -> PredictionTensor {
    let n = tensor.num_points();
    let c = tensor.num_classes();
    let mut data = Vec::with_capacity(hypotheses.len() * n * c);
    for &h in hypotheses {
        for point in 0..n {
            data.extend_from_slice(tensor.row(h, point));
        }
    }
    PredictionTensor::from_probs(hypotheses.len(), n, c, data)
        .expect("rows of a valid tensor stay valid")
}
