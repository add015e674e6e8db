//! Desk-scale simulation scenarios for the `simulate` command.
//!
//! `stylized-n64` replays a query policy on the 64-hypothesis chain with
//! declared distances. The two synthetic scenarios run a full acquisition
//! loop over a Dirichlet ensemble: a discrete posterior over the sampled
//! hypotheses is updated exactly after every acquired label, the validation
//! error of the posterior-mean predictor drives the `tau` annealing, and
//! each round re-draws hypothesis pairs from the posterior.

use std::ops::Range;
use std::time::Instant;

use balance_core::{edge_mask, run_policy, stylized_space, EnsemblePairs, PredictionTensor,
    PosteriorState, synthesize_ensemble};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::algorithms::{run_algorithm, Round};
use crate::config::RunConfig;
use crate::CliError;

pub struct CurveRow {
    pub round: usize,
    pub labels: usize,
    pub error: f64,
    pub tau: f64,
    pub ms: u128,
}

pub fn run_scenario(name: &str, config: &RunConfig) -> Result<Vec<CurveRow>, CliError> {
    match name {
        "stylized-n64" => stylized_scenario(64, config),
        "synthetic-dirichlet" => synthetic_scenario(config, SyntheticParams::balanced()),
        "imbalanced-synthetic" => synthetic_scenario(config, SyntheticParams::imbalanced()),
        other => Err(CliError::config(format!("unknown scenario `{other}`"))),
    }
}

fn stylized_scenario(n: usize, config: &RunConfig) -> Result<Vec<CurveRow>, CliError> {
    let space = stylized_space(n).map_err(CliError::from_core)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    // the far end of the chain is the adversarial target for prefix checking
    let target = n - 1;
    let initial = PosteriorState::new(&space).support_diameter(&space);
    let mut rows = vec![CurveRow {
        round: 0,
        labels: 0,
        error: initial,
        tau: config.sigma,
        ms: 0,
    }];
    let budget = config.budget.unwrap_or(usize::MAX);
    if budget == 0 {
        return Ok(rows);
    }
    let trace = run_policy(&space, config.policy, target, config.sigma, &mut rng)
        .map_err(CliError::from_core)?;
    for (i, &diameter) in trace.diameters.iter().take(budget).enumerate() {
        rows.push(CurveRow {
            round: i + 1,
            labels: i + 1,
            error: diameter,
            tau: config.sigma,
            ms: 0,
        });
    }
    Ok(rows)
}

struct SyntheticParams {
    num_hypotheses: usize,
    pool_size: usize,
    holdout_size: usize,
    num_classes: usize,
    /// Probability of each class being a point's true class.
    class_mass: Vec<f64>,
    concentration: f64,
}

impl SyntheticParams {
    fn balanced() -> Self {
        Self {
            num_hypotheses: 40,
            pool_size: 150,
            holdout_size: 60,
            num_classes: 3,
            class_mass: vec![1.0 / 3.0; 3],
            concentration: 1.5,
        }
    }

    fn imbalanced() -> Self {
        Self {
            num_hypotheses: 40,
            pool_size: 150,
            holdout_size: 60,
            num_classes: 4,
            class_mass: vec![0.55, 0.25, 0.12, 0.08],
            concentration: 1.5,
        }
    }
}

fn synthetic_scenario(config: &RunConfig, params: SyntheticParams) -> Result<Vec<CurveRow>, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let c = params.num_classes;
    let total_points = params.pool_size + params.holdout_size;

    // base classifier: one dominant class per point
    let mut base = Vec::with_capacity(total_points * c);
    for _ in 0..total_points {
        let mut u: f64 = rng.gen();
        let mut class = c - 1;
        for (i, &mass) in params.class_mass.iter().enumerate() {
            if u < mass {
                class = i;
                break;
            }
            u -= mass;
        }
        let margin: f64 = rng.gen_range(0.55..0.9);
        for y in 0..c {
            base.push(if y == class {
                margin
            } else {
                (1.0 - margin) / (c - 1) as f64
            });
        }
    }
    // widely dispersed hypotheses around the base; hypothesis 0 is the
    // realized target whose labels the expert reports
    let ensemble = synthesize_ensemble(
        &base,
        total_points,
        c,
        params.concentration,
        params.num_hypotheses,
        &mut rng,
    )
    .map_err(CliError::from_core)?;
    let target = 0usize;
    let truth: Vec<usize> = (0..total_points)
        .map(|x| argmax(ensemble.row(target, x)))
        .collect();

    let mut posterior = vec![1.0 / params.num_hypotheses as f64; params.num_hypotheses];
    let mut unlabeled: Vec<usize> = (0..params.pool_size).collect();
    let holdout: Vec<usize> = (params.pool_size..total_points).collect();
    let holdout_truth = &truth[params.pool_size..];

    let error_of = |posterior: &[f64]| -> f64 {
        let mut wrong = 0usize;
        for (slot, &x) in holdout.iter().enumerate() {
            let mut mean = vec![0.0f64; c];
            for (h, &weight) in posterior.iter().enumerate() {
                let row = ensemble.row(h, x);
                for (acc, &p) in mean.iter_mut().zip(row) {
                    *acc += weight * p;
                }
            }
            let pred = argmax(&mean);
            if pred != holdout_truth[slot] {
                wrong += 1;
            }
        }
        wrong as f64 / holdout.len() as f64
    };

    let mut error = error_of(&posterior);
    let mut rows = vec![CurveRow {
        round: 0,
        labels: 0,
        error,
        tau: config.tau.resolve(error),
        ms: 0,
    }];

    let b = config.batch_size;
    let budget = config.budget.unwrap_or(30);
    let mut labels = 0usize;
    let mut round = 0usize;
    let k = config.num_pairs;
    while labels + b <= budget && unlabeled.len() >= b {
        round += 1;
        let start = Instant::now();
        let tau = config.tau.resolve(error);

        // re-draw 2K hypotheses from the posterior for this round
        let members: Vec<usize> = (0..2 * k)
            .map(|_| sample_weighted(&posterior, &mut rng))
            .collect();
        let pool_tensor = slice_tensor(&ensemble, &members, 0..params.pool_size);
        let ref_tensor = slice_tensor(&ensemble, &members, params.pool_size..total_points);
        let pair_idx: Vec<(usize, usize)> = (0..k).map(|i| (2 * i, 2 * i + 1)).collect();
        let mask = edge_mask(&pair_idx, &ref_tensor.hard_labels(), tau)
            .map_err(CliError::from_core)?;
        let pairs = EnsemblePairs::new(pair_idx, mask).map_err(CliError::from_core)?;

        let selection_config = config.selection();
        let round_ctx = Round {
            pool: &unlabeled,
            pairs: &pairs,
            tensor: &pool_tensor,
            ref_tensor: &ref_tensor,
            config: &selection_config,
            tau,
        };
        let selection = run_algorithm(config.algorithm, &round_ctx, &mut rng)?;
        for &x in &selection.indices {
            let label = truth[x];
            for (h, weight) in posterior.iter_mut().enumerate() {
                *weight *= ensemble.row(h, x)[label];
            }
            let total: f64 = posterior.iter().sum();
            if total > 0.0 {
                for w in posterior.iter_mut() {
                    *w /= total;
                }
            }
            unlabeled.retain(|&u| u != x);
        }
        labels += b;
        error = error_of(&posterior);
        rows.push(CurveRow {
            round,
            labels,
            error,
            tau,
            ms: if config.record_timings {
                start.elapsed().as_millis()
            } else {
                0
            },
        });
    }
    Ok(rows)
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

fn sample_weighted<R: Rng>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if u < w {
            return i;
        }
        u -= w;
    }
    weights.len() - 1
}

/// Rows of the chosen hypotheses restricted to a point range, renumbered
/// from zero.
fn slice_tensor(
    tensor: &PredictionTensor,
    hypotheses: &[usize],
    points: Range<usize>,
) -> PredictionTensor {
    let c = tensor.num_classes();
    let width = points.len();
    let mut data = Vec::with_capacity(hypotheses.len() * width * c);
    for &h in hypotheses {
        for point in points.clone() {
            data.extend_from_slice(tensor.row(h, point));
        }
    }
    PredictionTensor::from_probs(hypotheses.len(), width, c, data)
        .expect("slices of a valid tensor stay valid")
}
