//! Explicit equivalence-class machinery.
//!
//! Farthest-first traversal partitions hypotheses so that every member lies
//! within `tau` of its center (a 2-approximation of the optimal k-center
//! radius), the induced edge set collects all cross-class hypothesis pairs,
//! and the partition-based acquisition variant scores a point by the
//! expected edge-weight discount over those edges.

use crate::acquisition::PROB_FLOOR;
use crate::error::{BalanceError, Result};
use crate::tensor::{hamming_distance, LabelMatrix};
use crate::tensor::PredictionTensor;

/// A center-based partition of hypotheses.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    /// Center hypothesis indices in discovery order.
    pub centers: Vec<usize>,
    /// Center ordinal for every hypothesis; `assignment[centers[i]] == i`.
    pub assignment: Vec<usize>,
    /// Largest distance from any member to its assigned center.
    pub radius: f64,
}

impl Partition {
    pub fn num_classes(&self) -> usize {
        self.centers.len()
    }
}

/// Farthest-first traversal over an arbitrary distance oracle.
///
/// Starting from `start`, the point farthest from the current centers is
/// promoted to a new center until that farthest distance drops to `tau` or
/// below; every point is then assigned to its nearest center (ties to the
/// earliest center).
pub fn fft_cluster_by<F>(n: usize, tau: f64, start: usize, dist: F) -> Partition
where
    F: Fn(usize, usize) -> f64,
{
    assert!(n >= 1 && start < n, "need at least one point and valid start");
    let mut centers = vec![start];
    let mut nearest: Vec<f64> = (0..n).map(|j| dist(start, j)).collect();
    let mut owner = vec![0usize; n];
    loop {
        let mut far = 0usize;
        let mut far_dist = nearest[0];
        for (j, &d) in nearest.iter().enumerate().skip(1) {
            if d > far_dist {
                far = j;
                far_dist = d;
            }
        }
        if far_dist <= tau {
            break;
        }
        let ordinal = centers.len();
        centers.push(far);
        for j in 0..n {
            let d = dist(far, j);
            if d < nearest[j] {
                nearest[j] = d;
                owner[j] = ordinal;
            }
        }
    }
    let radius = nearest.iter().cloned().fold(0.0, f64::max);
    Partition {
        centers,
        assignment: owner,
        radius,
    }
}

/// Farthest-first traversal of hypotheses under the Hamming distance on
/// their reference-set predictions.
pub fn fft_cluster(labels: &LabelMatrix, tau: f64, start: usize) -> Partition {
    fft_cluster_by(labels.num_hypotheses(), tau, start, |a, b| {
        hamming_distance(labels.row(a), labels.row(b)).expect("rows share one reference set")
    })
}

/// All unordered hypothesis pairs whose members sit in different classes.
pub fn induced_edges(partition: &Partition) -> Vec<(usize, usize)> {
    let n = partition.assignment.len();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if partition.assignment[i] != partition.assignment[j] {
                edges.push((i, j));
            }
        }
    }
    edges
}

/// Partition-based acquisition score of a single point.
///
/// `E_y[ sum_(h,h') in E  w_h w_h' (1 - lam_h(y) lam_h'(y)) ]` with the
/// outcome distribution taken as the ensemble mixture. `weights` defaults
/// to uniform `1/S` over the tensor's hypotheses.
pub fn partition_delta(
    point: usize,
    edges: &[(usize, usize)],
    tensor: &PredictionTensor,
    weights: Option<&[f64]>,
) -> Result<f64> {
    let s = tensor.num_hypotheses();
    let c = tensor.num_classes();
    let uniform = vec![1.0 / s as f64; s];
    let w = match weights {
        Some(w) if w.len() != s => {
            return Err(BalanceError::Config(format!(
                "{} weights for {s} hypotheses",
                w.len()
            )))
        }
        Some(w) => w,
        None => &uniform,
    };
    // lam_h(y) per hypothesis, plus the posterior-proxy mixture over y
    let mut lam = vec![0.0f64; s * c];
    let mut mixture = vec![0.0f64; c];
    for h in 0..s {
        let row = tensor.row(h, point);
        let max = row.iter().cloned().fold(0.0, f64::max).max(PROB_FLOOR);
        for y in 0..c {
            lam[h * c + y] = row[y].max(PROB_FLOOR) / max;
            mixture[y] += w[h] * row[y];
        }
    }
    let wsum: f64 = w.iter().sum();
    let mut total = 0.0;
    for (y, &mass) in mixture.iter().enumerate() {
        let mut discount = 0.0;
        for &(h, hp) in edges {
            discount += w[h] * w[hp] * (1.0 - lam[h * c + y] * lam[hp * c + y]);
        }
        total += mass / wsum * discount;
    }
    Ok(total)
}
