//! Posterior-ensemble prediction tensors and hard-label views.
//!
//! A [`PredictionTensor`] holds the class-probability predictions of `S`
//! sampled hypotheses on `N` data points with `C` classes, stored row-major
//! as `S x N x C`. Hypotheses are compared through their hard argmax labels
//! on a reference set via the normalized Hamming distance.

use crate::error::{BalanceError, Result};

/// Row sums may drift from 1 by at most this much before ingestion fails.
pub const ROW_SUM_TOLERANCE: f64 = 1e-6;

/// Class-probability predictions of `S` hypotheses on `N` points, `C` classes.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionTensor {
    num_hypotheses: usize,
    num_points: usize,
    num_classes: usize,
    probs: Vec<f64>,
}

impl PredictionTensor {
    /// Validates and ingests raw probabilities (row-major `S x N x C`).
    ///
    /// Every `(s, n)` row must sum to 1 within [`ROW_SUM_TOLERANCE`] and is
    /// renormalized to sum to 1 exactly, so downstream arithmetic can assume
    /// proper probability rows even after lossy serialization.
    pub fn from_probs(
        num_hypotheses: usize,
        num_points: usize,
        num_classes: usize,
        mut probs: Vec<f64>,
    ) -> Result<Self> {
        if num_hypotheses < 1 || num_points < 1 || num_classes < 2 {
            return Err(BalanceError::InvalidTensor(format!(
                "dims S={num_hypotheses}, N={num_points}, C={num_classes} (need S>=1, N>=1, C>=2)"
            )));
        }
        let expected = num_hypotheses
            .checked_mul(num_points)
            .and_then(|v| v.checked_mul(num_classes))
            .ok_or_else(|| BalanceError::InvalidTensor("dimension overflow".into()))?;
        if probs.len() != expected {
            return Err(BalanceError::InvalidTensor(format!(
                "expected {expected} values, got {}",
                probs.len()
            )));
        }
        for row in probs.chunks_mut(num_classes) {
            let mut sum = 0.0;
            for &v in row.iter() {
                if !v.is_finite() || !(0.0..=1.0 + ROW_SUM_TOLERANCE).contains(&v) {
                    return Err(BalanceError::InvalidTensor(format!(
                        "probability {v} outside [0, 1]"
                    )));
                }
                sum += v;
            }
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(BalanceError::InvalidTensor(format!(
                    "row sums to {sum}, expected 1"
                )));
            }
            for v in row.iter_mut() {
                *v /= sum;
            }
        }
        Ok(Self {
            num_hypotheses,
            num_points,
            num_classes,
            probs,
        })
    }

    pub fn num_hypotheses(&self) -> usize {
        self.num_hypotheses
    }

    pub fn num_points(&self) -> usize {
        self.num_points
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    /// Probability row `p(y | hypothesis, point)`.
    #[inline]
    pub fn row(&self, hypothesis: usize, point: usize) -> &[f64] {
        let base = (hypothesis * self.num_points + point) * self.num_classes;
        &self.probs[base..base + self.num_classes]
    }

    pub fn values(&self) -> &[f64] {
        &self.probs
    }

    /// Argmax predictions per hypothesis per point; ties break to the lowest
    /// class index so label extraction is deterministic.
    pub fn hard_labels(&self) -> LabelMatrix {
        let mut labels = Vec::with_capacity(self.num_hypotheses * self.num_points);
        for row in self.probs.chunks(self.num_classes) {
            let mut best = 0usize;
            for (c, &v) in row.iter().enumerate().skip(1) {
                if v > row[best] {
                    best = c;
                }
            }
            labels.push(best as u32);
        }
        LabelMatrix {
            num_hypotheses: self.num_hypotheses,
            num_points: self.num_points,
            labels,
        }
    }
}

/// Hard class predictions of `S` hypotheses on a reference set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMatrix {
    num_hypotheses: usize,
    num_points: usize,
    labels: Vec<u32>,
}

impl LabelMatrix {
    pub fn from_rows(rows: &[Vec<u32>]) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(BalanceError::InvalidTensor("empty label matrix".into()));
        }
        let width = rows[0].len();
        let mut labels = Vec::with_capacity(rows.len() * width);
        for r in rows {
            if r.len() != width {
                return Err(BalanceError::LengthMismatch {
                    left: width,
                    right: r.len(),
                });
            }
            labels.extend_from_slice(r);
        }
        Ok(Self {
            num_hypotheses: rows.len(),
            num_points: width,
            labels,
        })
    }

    pub fn num_hypotheses(&self) -> usize {
        self.num_hypotheses
    }

    pub fn num_points(&self) -> usize {
        self.num_points
    }

    #[inline]
    pub fn row(&self, hypothesis: usize) -> &[u32] {
        let base = hypothesis * self.num_points;
        &self.labels[base..base + self.num_points]
    }
}

/// Normalized Hamming distance: the fraction of positions where two label
/// rows disagree. Ranges over `[0, 1]`.
pub fn hamming_distance(a: &[u32], b: &[u32]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(BalanceError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(BalanceError::InvalidTensor("empty label rows".into()));
    }
    let differing = a.iter().zip(b).filter(|(x, y)| x != y).count();
    Ok(differing as f64 / a.len() as f64)
}
