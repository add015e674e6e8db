//! Batch query construction.
//!
//! Small batches are built greedily: step `b` picks the candidate that
//! maximizes the batch score of the current selection plus that candidate.
//! While the label-configuration space `C^b` is small the score is computed
//! exactly from cached per-pair probability matrices; beyond the enumeration
//! threshold the score switches to a self-normalized importance-sampling
//! estimator over `M` sampled configurations, with the running mixture
//! `p_mix(y_{1:b-1})` as the proposal.
//!
//! Large batches are dispatched to power sampling plus similarity clustering:
//! a candidate subset is drawn with `p(x) ~ delta(x)^beta` (Gumbel top-k),
//! then Lloyd-style medoid clustering under the pairwise information measure
//! `I(x, y) = delta(x) + delta(y) - delta({x, y})` returns the batch of
//! cluster centroids.

use std::collections::HashMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::acquisition::{balance_exact, config_count, PROB_FLOOR};
use crate::ensemble::EnsemblePairs;
use crate::error::{BalanceError, Result};
use crate::tensor::PredictionTensor;

/// Knobs for batch construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectionConfig {
    /// Batch size `B`.
    pub batch_size: usize,
    /// Number of hypothesis pairs `K`.
    pub num_pairs: usize,
    /// Number of sampled label configurations `M` for large batches.
    pub num_config_samples: usize,
    /// Coldness exponent of the power distribution.
    pub beta: f64,
    /// Batch sizes below this are scored by exact enumeration.
    pub enumeration_threshold: usize,
    /// Batches at least this large take the clustering path.
    pub dispatch_threshold: usize,
    /// Candidate subset size is `round(subsample_factor * B)`.
    pub subsample_factor: f64,
    /// Cap on Lloyd iterations.
    pub max_cluster_iters: usize,
    /// Seed for the selection RNG stream.
    pub seed: u64,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self {
            batch_size: 1,
            num_pairs: 8,
            num_config_samples: 10_000,
            beta: 1.0,
            enumeration_threshold: 4,
            dispatch_threshold: 50,
            subsample_factor: 2.0,
            max_cluster_iters: 5,
            seed: 0,
        }
    }
}

impl SelectionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size < 1 {
            return Err(BalanceError::Config("batch_size must be >= 1".into()));
        }
        if self.num_pairs < 1 {
            return Err(BalanceError::Config("num_pairs must be >= 1".into()));
        }
        if self.num_config_samples < 1 {
            return Err(BalanceError::Config(
                "num_config_samples must be >= 1".into(),
            ));
        }
        if self.beta < 0.0 || !self.beta.is_finite() {
            return Err(BalanceError::Config("beta must be finite and >= 0".into()));
        }
        if self.enumeration_threshold < 2 {
            return Err(BalanceError::Config(
                "enumeration_threshold must be >= 2".into(),
            ));
        }
        if self.subsample_factor < 1.0 {
            return Err(BalanceError::Config(
                "subsample_factor must be >= 1".into(),
            ));
        }
        if self.max_cluster_iters < 1 {
            return Err(BalanceError::Config(
                "max_cluster_iters must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateMode {
    Exact,
    Sampled,
}

/// Per-pair probability rows of one candidate point, with row maxima.
struct CandidateRows<'a> {
    rows_a: Vec<&'a [f64]>,
    rows_b: Vec<&'a [f64]>,
    max_a: Vec<f64>,
    max_b: Vec<f64>,
}

impl<'a> CandidateRows<'a> {
    fn new(point: usize, pairs: &EnsemblePairs, tensor: &'a PredictionTensor) -> Self {
        let mut rows_a = Vec::with_capacity(pairs.len());
        let mut rows_b = Vec::with_capacity(pairs.len());
        let mut max_a = Vec::with_capacity(pairs.len());
        let mut max_b = Vec::with_capacity(pairs.len());
        for &(a, b) in pairs.pairs() {
            let ra = tensor.row(a, point);
            let rb = tensor.row(b, point);
            max_a.push(ra.iter().cloned().fold(0.0, f64::max));
            max_b.push(rb.iter().cloned().fold(0.0, f64::max));
            rows_a.push(ra);
            rows_b.push(rb);
        }
        Self {
            rows_a,
            rows_b,
            max_a,
            max_b,
        }
    }
}

/// Incremental caches for greedy batch extension.
///
/// `p` and `p_alt` hold `p(y_{1:b} | w_k)` and `p(y_{1:b} | w'_k)` per pair
/// per configuration, stored configuration-major (`p[cfg * K + k]`). In
/// exact mode configurations enumerate all `C^b` label vectors; in sampled
/// mode they are `M` draws from the running mixture proposal. `a` and
/// `a_alt` carry the per-pair maxima `max_y p(y_{1:b} | w)`, which factorize
/// into products of per-point row maxima.
#[derive(Debug, Clone)]
pub struct BatchState {
    selected: Vec<usize>,
    num_pairs: usize,
    num_classes: usize,
    mode: StateMode,
    num_configs: usize,
    p: Vec<f64>,
    p_alt: Vec<f64>,
    a: Vec<f64>,
    a_alt: Vec<f64>,
    proposal_mass: Vec<f64>,
    /// Sampled label columns, one `Vec` (length `M`) per selected point.
    config_labels: Vec<Vec<u32>>,
}

impl BatchState {
    /// Empty exact-mode state: one (empty) configuration with probability 1.
    pub fn empty(pairs: &EnsemblePairs, num_classes: usize) -> Self {
        let k = pairs.len();
        Self {
            selected: Vec::new(),
            num_pairs: k,
            num_classes,
            mode: StateMode::Exact,
            num_configs: 1,
            p: vec![1.0; k],
            p_alt: vec![1.0; k],
            a: vec![1.0; k],
            a_alt: vec![1.0; k],
            proposal_mass: vec![1.0],
            config_labels: Vec::new(),
        }
    }

    pub fn mode(&self) -> StateMode {
        self.mode
    }

    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    pub fn num_configs(&self) -> usize {
        self.num_configs
    }

    pub fn probs(&self) -> (&[f64], &[f64]) {
        (&self.p, &self.p_alt)
    }

    pub fn maxima(&self) -> (&[f64], &[f64]) {
        (&self.a, &self.a_alt)
    }

    pub fn proposal_mass(&self) -> &[f64] {
        &self.proposal_mass
    }

    pub fn config_labels(&self) -> &[Vec<u32>] {
        &self.config_labels
    }

    /// Extends the state with point `x`. Exact mode multiplies the cached
    /// matrices out along a new configuration axis; sampled mode draws one
    /// label per configuration row from the mixture predictive.
    pub fn extend<R: Rng>(
        &self,
        x: usize,
        pairs: &EnsemblePairs,
        tensor: &PredictionTensor,
        rng: &mut R,
    ) -> Result<Self> {
        match self.mode {
            StateMode::Exact => self.extend_exact(x, pairs, tensor),
            StateMode::Sampled => Ok(self.extend_sampled(x, pairs, tensor, rng)),
        }
    }

    fn extend_exact(
        &self,
        x: usize,
        pairs: &EnsemblePairs,
        tensor: &PredictionTensor,
    ) -> Result<Self> {
        let cand = CandidateRows::new(x, pairs, tensor);
        let k = self.num_pairs;
        let c = self.num_classes;
        config_count(c, self.selected.len() + 1)?;
        let new_m = self.num_configs * c;
        let mut p = vec![0.0; new_m * k];
        let mut p_alt = vec![0.0; new_m * k];
        for cfg in 0..self.num_configs {
            for class in 0..c {
                let dst = (cfg * c + class) * k;
                let src = cfg * k;
                for pair in 0..k {
                    p[dst + pair] = self.p[src + pair] * cand.rows_a[pair][class];
                    p_alt[dst + pair] = self.p_alt[src + pair] * cand.rows_b[pair][class];
                }
            }
        }
        let a: Vec<f64> = self
            .a
            .iter()
            .zip(&cand.max_a)
            .map(|(&prev, &m)| prev * m)
            .collect();
        let a_alt: Vec<f64> = self
            .a_alt
            .iter()
            .zip(&cand.max_b)
            .map(|(&prev, &m)| prev * m)
            .collect();
        let norm = 1.0 / (2.0 * k as f64);
        let proposal_mass: Vec<f64> = (0..new_m)
            .map(|cfg| {
                let base = cfg * k;
                let mut sum = 0.0;
                for pair in 0..k {
                    sum += p[base + pair] + p_alt[base + pair];
                }
                sum * norm
            })
            .collect();
        let mut selected = self.selected.clone();
        selected.push(x);
        Ok(Self {
            selected,
            num_pairs: k,
            num_classes: c,
            mode: StateMode::Exact,
            num_configs: new_m,
            p,
            p_alt,
            a,
            a_alt,
            proposal_mass,
            config_labels: Vec::new(),
        })
    }

    fn extend_sampled<R: Rng>(
        &self,
        x: usize,
        pairs: &EnsemblePairs,
        tensor: &PredictionTensor,
        rng: &mut R,
    ) -> Self {
        let cand = CandidateRows::new(x, pairs, tensor);
        let k = self.num_pairs;
        let c = self.num_classes;
        let mut p = self.p.clone();
        let mut p_alt = self.p_alt.clone();
        let mut proposal_mass = self.proposal_mass.clone();
        let mut labels = Vec::with_capacity(self.num_configs);
        let mut weights = vec![0.0f64; c];
        for (cfg, mass) in proposal_mass.iter_mut().enumerate() {
            let base = cfg * k;
            let mut total = 0.0;
            for (class, w) in weights.iter_mut().enumerate() {
                let mut sum = 0.0;
                for pair in 0..k {
                    sum += p[base + pair] * cand.rows_a[pair][class]
                        + p_alt[base + pair] * cand.rows_b[pair][class];
                }
                *w = sum;
                total += sum;
            }
            let drawn = sample_categorical(&weights, total, rng);
            labels.push(drawn as u32);
            for pair in 0..k {
                p[base + pair] *= cand.rows_a[pair][drawn];
                p_alt[base + pair] *= cand.rows_b[pair][drawn];
            }
            *mass *= weights[drawn] / total;
        }
        let a: Vec<f64> = self
            .a
            .iter()
            .zip(&cand.max_a)
            .map(|(&prev, &m)| prev * m)
            .collect();
        let a_alt: Vec<f64> = self
            .a_alt
            .iter()
            .zip(&cand.max_b)
            .map(|(&prev, &m)| prev * m)
            .collect();
        let mut selected = self.selected.clone();
        selected.push(x);
        let mut config_labels = self.config_labels.clone();
        config_labels.push(labels);
        Self {
            selected,
            num_pairs: k,
            num_classes: c,
            mode: StateMode::Sampled,
            num_configs: self.num_configs,
            p,
            p_alt,
            a,
            a_alt,
            proposal_mass,
            config_labels,
        }
    }

    /// Converts an exact state into sampled mode by drawing `m_samples`
    /// configurations from the running mixture proposal.
    pub fn into_sampled<R: Rng>(&self, m_samples: usize, rng: &mut R) -> Self {
        assert_eq!(self.mode, StateMode::Exact, "state is already sampled");
        let k = self.num_pairs;
        let picks: Vec<usize> = if self.selected.is_empty() {
            vec![0; m_samples]
        } else {
            let dist = WeightedIndex::new(&self.proposal_mass)
                .expect("proposal mass is positive in exact mode");
            (0..m_samples).map(|_| dist.sample(rng)).collect()
        };
        let mut p = Vec::with_capacity(m_samples * k);
        let mut p_alt = Vec::with_capacity(m_samples * k);
        let mut proposal_mass = Vec::with_capacity(m_samples);
        for &cfg in &picks {
            let base = cfg * k;
            p.extend_from_slice(&self.p[base..base + k]);
            p_alt.extend_from_slice(&self.p_alt[base..base + k]);
            proposal_mass.push(self.proposal_mass[cfg]);
        }
        // decode configuration indices into per-point label columns
        let b = self.selected.len();
        let mut config_labels = vec![vec![0u32; m_samples]; b];
        for (row, &cfg) in picks.iter().enumerate() {
            let mut rest = cfg;
            for t in (0..b).rev() {
                config_labels[t][row] = (rest % self.num_classes) as u32;
                rest /= self.num_classes;
            }
        }
        Self {
            selected: self.selected.clone(),
            num_pairs: k,
            num_classes: self.num_classes,
            mode: StateMode::Sampled,
            num_configs: m_samples,
            p,
            p_alt,
            a: self.a.clone(),
            a_alt: self.a_alt.clone(),
            proposal_mass,
            config_labels,
        }
    }

    /// Exact batch score of `selected + {x}` from the cached matrices.
    ///
    /// Matches [`balance_exact`] on the same batch bit-for-bit: the same
    /// products are formed in the same order.
    pub fn exact_delta(
        &self,
        x: usize,
        pairs: &EnsemblePairs,
        tensor: &PredictionTensor,
    ) -> Result<f64> {
        assert_eq!(self.mode, StateMode::Exact);
        let cand = CandidateRows::new(x, pairs, tensor);
        let k = self.num_pairs;
        let c = self.num_classes;
        config_count(c, self.selected.len() + 1)?;
        let cells = self.num_configs * c;
        let mut mixture = vec![0.0f64; cells];
        let mut discount = vec![0.0f64; cells];
        for pair in 0..k {
            let amax = (self.a[pair] * cand.max_a[pair]).max(PROB_FLOOR);
            let bmax = (self.a_alt[pair] * cand.max_b[pair]).max(PROB_FLOOR);
            let active = pairs.edge_active()[pair];
            for cfg in 0..self.num_configs {
                let base = cfg * k + pair;
                for class in 0..c {
                    let pa = self.p[base] * cand.rows_a[pair][class];
                    let pb = self.p_alt[base] * cand.rows_b[pair][class];
                    let cell = cfg * c + class;
                    mixture[cell] += pa + pb;
                    if active {
                        let lam = pa.max(PROB_FLOOR) / amax * (pb.max(PROB_FLOOR) / bmax);
                        discount[cell] += 1.0 - lam;
                    }
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

    /// Self-normalized importance-sampling estimate of the batch score of
    /// `selected + {x}` over the sampled configurations.
    ///
    /// Each configuration row contributes
    /// `sum_c p_mix(c | prefix) * (1/K) sum_k active_k (1 - lam lam')`, where
    /// the conditional mixture weight divides the pair-summed extended
    /// probabilities by the pair-summed prefix probabilities (the proposal
    /// mass the row was drawn with).
    pub fn importance_delta(
        &self,
        x: usize,
        pairs: &EnsemblePairs,
        tensor: &PredictionTensor,
    ) -> f64 {
        assert_eq!(self.mode, StateMode::Sampled);
        let cand = CandidateRows::new(x, pairs, tensor);
        let k = self.num_pairs;
        let c = self.num_classes;
        let inv_k = 1.0 / k as f64;
        let mut acc = 0.0;
        for cfg in 0..self.num_configs {
            let base = cfg * k;
            let mut denom = 0.0;
            for pair in 0..k {
                denom += self.p[base + pair] + self.p_alt[base + pair];
            }
            if denom <= 0.0 {
                continue;
            }
            let mut inner = 0.0;
            for class in 0..c {
                let mut num = 0.0;
                let mut disc = 0.0;
                for pair in 0..k {
                    let pa = self.p[base + pair] * cand.rows_a[pair][class];
                    let pb = self.p_alt[base + pair] * cand.rows_b[pair][class];
                    num += pa + pb;
                    if pairs.edge_active()[pair] {
                        let amax = (self.a[pair] * cand.max_a[pair]).max(PROB_FLOOR);
                        let bmax = (self.a_alt[pair] * cand.max_b[pair]).max(PROB_FLOOR);
                        let lam = pa.max(PROB_FLOOR) / amax * (pb.max(PROB_FLOOR) / bmax);
                        disc += 1.0 - lam;
                    }
                }
                inner += num / denom * (disc * inv_k);
            }
            acc += inner;
        }
        acc / self.num_configs as f64
    }

    /// Score of `selected + {x}` on whichever path the state is in.
    pub fn score(&self, x: usize, pairs: &EnsemblePairs, tensor: &PredictionTensor) -> Result<f64> {
        match self.mode {
            StateMode::Exact => self.exact_delta(x, pairs, tensor),
            StateMode::Sampled => Ok(self.importance_delta(x, pairs, tensor)),
        }
    }
}

fn sample_categorical<R: Rng>(weights: &[f64], total: f64, rng: &mut R) -> usize {
    debug_assert!(total > 0.0, "mixture conditional has zero mass");
    let mut u = rng.gen::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if u < w {
            return i;
        }
        u -= w;
    }
    weights.len() - 1
}

/// Per-point batch scores `delta({x})` for every pool entry, in pool order.
pub fn pool_deltas(
    pool: &[usize],
    pairs: &EnsemblePairs,
    tensor: &PredictionTensor,
) -> Result<Vec<f64>> {
    pool.par_iter()
        .map(|&x| balance_exact(&[x], pairs, tensor))
        .collect()
}

/// Greedy batch selection: step `b` adds the candidate maximizing the batch
/// score, exact while `b` is below the enumeration threshold and
/// importance-sampled beyond it. Ties break to the lowest point index.
pub fn greedy_select<R: Rng>(
    pool: &[usize],
    pairs: &EnsemblePairs,
    tensor: &PredictionTensor,
    config: &SelectionConfig,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let picks = greedy_select_scored(pool, pairs, tensor, config, rng)?;
    Ok(picks.into_iter().map(|(x, _)| x).collect())
}

/// Greedy selection that also reports the batch score at each pick.
pub fn greedy_select_scored<R: Rng>(
    pool: &[usize],
    pairs: &EnsemblePairs,
    tensor: &PredictionTensor,
    config: &SelectionConfig,
    rng: &mut R,
) -> Result<Vec<(usize, f64)>> {
    if pool.is_empty() {
        return Err(BalanceError::EmptyPool);
    }
    if config.batch_size > pool.len() {
        return Err(BalanceError::BatchTooLarge {
            batch: config.batch_size,
            pool: pool.len(),
        });
    }
    let mut state = BatchState::empty(pairs, tensor.num_classes());
    let mut picks: Vec<(usize, f64)> = Vec::with_capacity(config.batch_size);
    let mut taken = vec![false; pool.len()];
    for step in 1..=config.batch_size {
        if state.mode() == StateMode::Exact
            && (step >= config.enumeration_threshold
                || config_count(tensor.num_classes(), step).is_err())
        {
            state = state.into_sampled(config.num_config_samples, rng);
        }
        let scores: Vec<(usize, f64)> = pool
            .par_iter()
            .enumerate()
            .filter(|(slot, _)| !taken[*slot])
            .map(|(slot, &x)| {
                let s = match state.mode() {
                    StateMode::Exact => state.exact_delta(x, pairs, tensor)?,
                    StateMode::Sampled => state.importance_delta(x, pairs, tensor),
                };
                Ok((slot, s))
            })
            .collect::<Result<_>>()?;
        let mut best: Option<(usize, f64)> = None;
        for (slot, s) in scores {
            let replace = match best {
                None => true,
                Some((bslot, bs)) => s > bs || (s == bs && pool[slot] < pool[bslot]),
            };
            if replace {
                best = Some((slot, s));
            }
        }
        let (slot, score) = best.expect("non-empty candidate set");
        taken[slot] = true;
        state = state.extend(pool[slot], pairs, tensor, rng)?;
        picks.push((pool[slot], score));
    }
    Ok(picks)
}

fn gumbel<R: Rng>(rng: &mut R) -> f64 {
    let u: f64 = rng.gen::<f64>().max(1e-300);
    -(-u.ln()).ln()
}

/// Samples `batch` distinct indices without replacement with probability
/// proportional to `score^beta`, as the top-`batch` of
/// `beta * ln(score) + Gumbel(0, 1)`. Zero-score indices are excluded from
/// the weighted phase; if fewer than `batch` scores are positive the
/// remainder is filled uniformly at random.
pub fn power_sample<R: Rng>(scores: &[f64], beta: f64, batch: usize, rng: &mut R) -> Vec<usize> {
    assert!(batch <= scores.len(), "batch exceeds candidate count");
    let mut keyed: Vec<(usize, f64)> = scores
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > 0.0)
        .map(|(i, &s)| (i, beta * s.ln() + gumbel(rng)))
        .collect();
    keyed.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    let mut picked: Vec<usize> = keyed.iter().take(batch).map(|&(i, _)| i).collect();
    if picked.len() < batch {
        let rest: Vec<usize> = (0..scores.len()).filter(|i| scores[*i] <= 0.0).collect();
        let need = batch - picked.len();
        let fill = rand::seq::index::sample(rng, rest.len(), need);
        picked.extend(fill.iter().map(|j| rest[j]));
    }
    picked
}

/// Pairwise information measure `delta(x) + delta(y) - delta({x, y})`: the
/// overlap of the two points' acquisition utility. Symmetric in `x`, `y`.
pub fn info_measure(
    x: usize,
    y: usize,
    pairs: &EnsemblePairs,
    tensor: &PredictionTensor,
) -> Result<f64> {
    let dx = balance_exact(&[x], pairs, tensor)?;
    let dy = balance_exact(&[y], pairs, tensor)?;
    let dxy = balance_exact(&[x, y], pairs, tensor)?;
    Ok(dx + dy - dxy)
}

/// Medoid clustering of a candidate subset under the information measure.
#[derive(Debug, Clone)]
pub struct ClusteringOutcome {
    /// Centroid point indices, one per cluster.
    pub centroids: Vec<usize>,
    /// Cluster member point indices (each includes its centroid).
    pub clusters: Vec<Vec<usize>>,
    /// Lloyd iterations executed.
    pub iterations: usize,
}

/// Pairwise-score cache keyed by subset positions.
struct InfoCache {
    deltas: Vec<f64>,
    joint: HashMap<(usize, usize), f64>,
}

impl InfoCache {
    fn key(x: usize, y: usize) -> (usize, usize) {
        (x.min(y), x.max(y))
    }

    fn ensure(
        &mut self,
        wanted: impl Iterator<Item = (usize, usize)>,
        subset: &[usize],
        pairs: &EnsemblePairs,
        tensor: &PredictionTensor,
    ) -> Result<()> {
        let mut missing: Vec<(usize, usize)> = wanted
            .map(|(x, y)| Self::key(x, y))
            .filter(|k| !self.joint.contains_key(k))
            .collect();
        missing.sort_unstable();
        missing.dedup();
        let computed: Vec<((usize, usize), f64)> = missing
            .par_iter()
            .map(|&(x, y)| {
                let d = balance_exact(&[subset[x], subset[y]], pairs, tensor)?;
                Ok(((x, y), d))
            })
            .collect::<Result<_>>()?;
        self.joint.extend(computed);
        Ok(())
    }

    fn info(&self, x: usize, y: usize) -> f64 {
        self.deltas[x] + self.deltas[y] - self.joint[&Self::key(x, y)]
    }
}

/// Lloyd-style clustering with the information measure as similarity.
///
/// Initial centroids are drawn with `p(x) ~ delta(x)^beta`; each iteration
/// assigns every point to its most similar centroid and re-centers each
/// cluster on the member maximizing total within-cluster similarity.
/// Centroids stay pinned to their own clusters, so clusters are never empty
/// and every centroid is a member of its cluster. Stops when assignments
/// repeat or after `max_cluster_iters` passes.
pub fn balance_clustering<R: Rng>(
    subset: &[usize],
    pairs: &EnsemblePairs,
    tensor: &PredictionTensor,
    config: &SelectionConfig,
    rng: &mut R,
) -> Result<ClusteringOutcome> {
    let b = config.batch_size;
    if subset.len() < b {
        return Err(BalanceError::SubsetTooSmall {
            subset: subset.len(),
            clusters: b,
        });
    }
    let deltas = pool_deltas(subset, pairs, tensor)?;
    let mut centroids = power_sample(&deltas, config.beta, b, rng);
    centroids.sort_unstable();
    let mut cache = InfoCache {
        deltas,
        joint: HashMap::new(),
    };
    let n = subset.len();
    let mut prev: Option<Vec<usize>> = None;
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut iterations = 0;
    for _ in 0..config.max_cluster_iters {
        iterations += 1;
        cache.ensure(
            (0..n).flat_map(|i| centroids.iter().map(move |&m| (i, m))),
            subset,
            pairs,
            tensor,
        )?;
        let mut assignment = vec![0usize; n];
        for (i, slot) in assignment.iter_mut().enumerate() {
            if let Some(j) = centroids.iter().position(|&m| m == i) {
                *slot = j;
                continue;
            }
            let mut best = 0usize;
            let mut best_info = cache.info(i, centroids[0]);
            for (j, &m) in centroids.iter().enumerate().skip(1) {
                let v = cache.info(i, m);
                if v > best_info {
                    best = j;
                    best_info = v;
                }
            }
            *slot = best;
        }
        clusters = vec![Vec::new(); b];
        for (i, &j) in assignment.iter().enumerate() {
            clusters[j].push(i);
        }
        if prev.as_ref() == Some(&assignment) {
            break;
        }
        prev = Some(assignment);
        for (j, members) in clusters.iter().enumerate() {
            cache.ensure(
                members
                    .iter()
                    .flat_map(|&x| members.iter().map(move |&y| (x, y))),
                subset,
                pairs,
                tensor,
            )?;
            let objective = |y: usize| members.iter().map(|&x| cache.info(x, y)).sum::<f64>();
            let mut best = centroids[j];
            let mut best_obj = objective(best);
            for &y in members {
                let obj = objective(y);
                if obj > best_obj {
                    best = y;
                    best_obj = obj;
                }
            }
            centroids[j] = best;
        }
    }
    Ok(ClusteringOutcome {
        centroids: centroids.iter().map(|&m| subset[m]).collect(),
        clusters: clusters
            .into_iter()
            .map(|members| members.into_iter().map(|i| subset[i]).collect())
            .collect(),
        iterations,
    })
}

/// Candidate subset size for the clustering path: `round(factor * batch)`,
/// clamped between the batch size and the pool size.
pub fn subsample_size(factor: f64, batch: usize, pool: usize) -> usize {
    ((factor * batch as f64).round() as usize).max(batch).min(pool)
}

/// Full batch dispatch: greedy selection for small batches, power-sampled
/// downsampling plus clustering for large ones. When every pool score is
/// zero (all edges inactive, e.g. `tau` at saturation) the batch falls back
/// to a uniform random subset.
pub fn select_batch<R: Rng>(
    pool: &[usize],
    pairs: &EnsemblePairs,
    tensor: &PredictionTensor,
    config: &SelectionConfig,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if pool.is_empty() {
        return Err(BalanceError::EmptyPool);
    }
    let b = config.batch_size;
    if b > pool.len() {
        return Err(BalanceError::BatchTooLarge {
            batch: b,
            pool: pool.len(),
        });
    }
    let deltas = pool_deltas(pool, pairs, tensor)?;
    if deltas.iter().all(|&d| d <= 0.0) {
        let picks = rand::seq::index::sample(rng, pool.len(), b);
        return Ok(picks.iter().map(|i| pool[i]).collect());
    }
    if b < config.dispatch_threshold {
        return greedy_select(pool, pairs, tensor, config, rng);
    }
    let want = subsample_size(config.subsample_factor, b, pool.len());
    let mut subset_positions = power_sample(&deltas, config.beta, want, rng);
    subset_positions.sort_unstable();
    let subset: Vec<usize> = subset_positions.iter().map(|&i| pool[i]).collect();
    let outcome = balance_clustering(&subset, pairs, tensor, config, rng)?;
    Ok(outcome.centroids)
}
