//! Synthetic ensemble fixtures.

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{BalanceError, Result};
use crate::tensor::PredictionTensor;

/// Smallest Dirichlet parameter, so zero-probability base classes still
/// produce a valid (near-zero) component.
const MIN_ALPHA: f64 = 1e-3;

/// Draws `num_hypotheses` prediction tensors as Dirichlet perturbations of a
/// base classifier's rows (`base_rows` is `num_points x num_classes`,
/// row-major). Row `(s, n)` is sampled from `Dirichlet(concentration *
/// base_row(n))`: the mean stays at the base row and larger `concentration`
/// shrinks the dispersion.
pub fn synthesize_ensemble<R: Rng>(
    base_rows: &[f64],
    num_points: usize,
    num_classes: usize,
    concentration: f64,
    num_hypotheses: usize,
    rng: &mut R,
) -> Result<PredictionTensor> {
    if concentration <= 0.0 || !concentration.is_finite() {
        return Err(BalanceError::Config(format!(
            "concentration {concentration} must be positive"
        )));
    }
    if base_rows.len() != num_points * num_classes {
        return Err(BalanceError::Config("base row size mismatch".into()));
    }
    let mut data = Vec::with_capacity(num_hypotheses * base_rows.len());
    for _ in 0..num_hypotheses {
        for row in base_rows.chunks(num_classes) {
            data.extend(dirichlet_row(row, concentration, rng));
        }
    }
    PredictionTensor::from_probs(num_hypotheses, num_points, num_classes, data)
}

/// A tensor of independent flat-Dirichlet rows, handy as a random fixture.
pub fn random_tensor<R: Rng>(
    num_hypotheses: usize,
    num_points: usize,
    num_classes: usize,
    rng: &mut R,
) -> PredictionTensor {
    let uniform = vec![1.0 / num_classes as f64; num_classes];
    let mut data = Vec::with_capacity(num_hypotheses * num_points * num_classes);
    for _ in 0..num_hypotheses * num_points {
        data.extend(dirichlet_row(&uniform, num_classes as f64, rng));
    }
    PredictionTensor::from_probs(num_hypotheses, num_points, num_classes, data)
        .expect("generated rows are valid")
}

fn dirichlet_row<R: Rng>(base: &[f64], concentration: f64, rng: &mut R) -> Vec<f64> {
    let mut draws: Vec<f64> = base
        .iter()
        .map(|&p| {
            let alpha = (concentration * p).max(MIN_ALPHA);
            let gamma = Gamma::new(alpha, 1.0).expect("alpha is positive");
            gamma.sample(rng).max(0.0)
        })
        .collect();
    let total: f64 = draws.iter().sum();
    if total <= 0.0 {
        // astronomically unlikely; degrade to the base row
        return base.to_vec();
    }
    for d in draws.iter_mut() {
        *d /= total;
    }
    draws
}
