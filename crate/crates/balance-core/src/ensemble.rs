//! Hypothesis pairing, edge activity, and threshold annealing.
//!
//! A pair of posterior samples forms an active edge when the Hamming
//! distance between their reference-set predictions exceeds the threshold
//! `tau`. Only active edges contribute to the acquisition scores; annealing
//! `tau` with the model's validation error shrinks the effective
//! equivalence-class radius as learning progresses.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{BalanceError, Result};
use crate::tensor::{hamming_distance, LabelMatrix};

/// `K` ordered hypothesis pairs with a per-pair activity flag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnsemblePairs {
    pairs: Vec<(usize, usize)>,
    edge_active: Vec<bool>,
}

impl EnsemblePairs {
    /// Builds a pair set from explicit indices and activity flags.
    ///
    /// Pairs must be disjoint: all `2K` indices distinct.
    pub fn new(pairs: Vec<(usize, usize)>, edge_active: Vec<bool>) -> Result<Self> {
        if pairs.len() != edge_active.len() {
            return Err(BalanceError::Config(format!(
                "{} pairs but {} edge flags",
                pairs.len(),
                edge_active.len()
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for &(a, b) in &pairs {
            if a == b || !seen.insert(a) || !seen.insert(b) {
                return Err(BalanceError::Config(
                    "pair indices must be pairwise distinct".into(),
                ));
            }
        }
        Ok(Self { pairs, edge_active })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn edge_active(&self) -> &[bool] {
        &self.edge_active
    }

    pub fn any_active(&self) -> bool {
        self.edge_active.iter().any(|&a| a)
    }

    /// Recomputes the activity mask against reference labels and threshold.
    pub fn with_edge_mask(mut self, ref_labels: &LabelMatrix, tau: f64) -> Result<Self> {
        self.edge_active = edge_mask(&self.pairs, ref_labels, tau)?;
        Ok(self)
    }
}

/// Draws `K` disjoint hypothesis pairs uniformly without replacement.
///
/// `2K` distinct indices are sampled and paired consecutively, so every
/// sampled hypothesis appears in exactly one pair. Deterministic for a
/// fixed RNG stream. The edge mask starts all-inactive; apply
/// [`EnsemblePairs::with_edge_mask`] once reference labels are available.
pub fn pair_hypotheses<R: Rng>(
    num_hypotheses: usize,
    num_pairs: usize,
    rng: &mut R,
) -> Result<EnsemblePairs> {
    if num_pairs == 0 {
        return Err(BalanceError::Config("need at least one pair".into()));
    }
    let wanted = 2 * num_pairs;
    if wanted > num_hypotheses {
        return Err(BalanceError::NotEnoughHypotheses {
            pairs: num_pairs,
            hypotheses: num_hypotheses,
        });
    }
    let chosen = rand::seq::index::sample(rng, num_hypotheses, wanted).into_vec();
    let pairs = chosen.chunks(2).map(|c| (c[0], c[1])).collect();
    Ok(EnsemblePairs {
        pairs,
        edge_active: vec![false; num_pairs],
    })
}

/// Marks pair `k` active iff `d_H(row(a), row(b)) > tau` (strict).
pub fn edge_mask(
    pairs: &[(usize, usize)],
    ref_labels: &LabelMatrix,
    tau: f64,
) -> Result<Vec<bool>> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(BalanceError::Config(format!("tau {tau} outside [0, 1]")));
    }
    pairs
        .iter()
        .map(|&(a, b)| {
            let d = hamming_distance(ref_labels.row(a), ref_labels.row(b))?;
            Ok(d > tau)
        })
        .collect()
}

/// How the edge threshold is chosen each acquisition round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum TauSchedule {
    /// Constant threshold.
    Fixed { value: f64 },
    /// `tau = epsilon / divisor`, tracking the validation error rate.
    Annealed { divisor: f64 },
}

impl TauSchedule {
    /// Resolves the threshold for the round's validation error `epsilon`,
    /// clamped to `[0, 1]`.
    pub fn resolve(&self, epsilon: f64) -> f64 {
        match *self {
            TauSchedule::Fixed { value } => value.clamp(0.0, 1.0),
            TauSchedule::Annealed { divisor } => (epsilon / divisor).clamp(0.0, 1.0),
        }
    }
}

impl Default for TauSchedule {
    fn default() -> Self {
        TauSchedule::Annealed { divisor: 4.0 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pairing_is_disjoint_and_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pairs = pair_hypotheses(200, 100, &mut rng).unwrap();
        assert_eq!(pairs.len(), 100);
        let mut seen = std::collections::HashSet::new();
        for &(a, b) in pairs.pairs() {
            assert!(a < 200 && b < 200 && a != b);
            assert!(seen.insert(a) && seen.insert(b));
        }
        assert_eq!(seen.len(), 200);

        let mut rng2 = ChaCha8Rng::seed_from_u64(11);
        let again = pair_hypotheses(200, 100, &mut rng2).unwrap();
        assert_eq!(pairs, again);
    }

    #[test]
    fn minimal_pairing() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let pairs = pair_hypotheses(2, 1, &mut rng).unwrap();
        let (a, b) = pairs.pairs()[0];
        assert_eq!({ (a.min(b), a.max(b)) }, (0, 1));
        assert!(pair_hypotheses(3, 2, &mut rng).is_err());
    }

    #[test]
    fn edge_mask_strict_threshold() {
        let labels =
            LabelMatrix::from_rows(&[vec![0, 0, 0, 0], vec![0, 0, 0, 0], vec![1, 1, 0, 0]])
                .unwrap();
        // identical rows, tau = 0: d = 0 is not > 0
        assert_eq!(edge_mask(&[(0, 1)], &labels, 0.0).unwrap(), vec![false]);
        // d = 0.5 > 0.3
        assert_eq!(edge_mask(&[(0, 2)], &labels, 0.3).unwrap(), vec![true]);
        // tau = 1 can never be exceeded
        assert_eq!(edge_mask(&[(0, 2)], &labels, 1.0).unwrap(), vec![false]);
    }

    #[test]
    fn tau_schedule_examples() {
        let half = TauSchedule::Annealed { divisor: 2.0 };
        assert!((half.resolve(0.2) - 0.1).abs() < 1e-15);
        let eighth = TauSchedule::Annealed { divisor: 8.0 };
        assert!((eighth.resolve(0.16) - 0.02).abs() < 1e-15);
        assert_eq!(eighth.resolve(0.0), 0.0);
        let fixed = TauSchedule::Fixed { value: 0.05 };
        assert_eq!(fixed.resolve(0.9), 0.05);
    }
}
