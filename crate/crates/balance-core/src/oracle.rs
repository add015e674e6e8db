//! Enumerable-hypothesis ground truth.
//!
//! A [`DiscreteHypothesisSpace`] carries an explicit prior, per-point label
//! likelihood tables, and a pairwise distance matrix, which makes exact
//! Bayesian updates, edge-cutting/discounting acquisition scores, and policy
//! simulation possible. The same module hosts the deliberately naive
//! [`brute_force_delta`]: a literal nested-loop evaluation of the batch
//! acquisition score with no matrix caching and no sampling, used to verify
//! the fast paths.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::acquisition::{entropy_bits, PROB_FLOOR};
use crate::error::{BalanceError, Result};
use crate::partition::{fft_cluster_by, Partition};
use crate::tensor::{LabelMatrix, PredictionTensor};

/// Finite hypothesis space with prior, likelihood tables, and distances.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiscreteHypothesisSpace {
    num_hypotheses: usize,
    num_points: usize,
    num_classes: usize,
    prior: Vec<f64>,
    /// `p(y | h, x)`, indexed `[h][x][y]` row-major.
    likelihoods: Vec<f64>,
    /// Symmetric `n x n` distance matrix with zero diagonal.
    distances: Vec<f64>,
}

impl DiscreteHypothesisSpace {
    pub fn new(
        prior: Vec<f64>,
        likelihoods: Vec<f64>,
        distances: Vec<f64>,
        num_points: usize,
        num_classes: usize,
    ) -> Result<Self> {
        let n = prior.len();
        if n == 0 || num_points == 0 || num_classes < 2 {
            return Err(BalanceError::Config(
                "space needs hypotheses, points, and at least two classes".into(),
            ));
        }
        let prior_sum: f64 = prior.iter().sum();
        if (prior_sum - 1.0).abs() > 1e-12 || prior.iter().any(|&p| p < 0.0) {
            return Err(BalanceError::Config(format!(
                "prior sums to {prior_sum}, expected 1"
            )));
        }
        if likelihoods.len() != n * num_points * num_classes {
            return Err(BalanceError::Config("likelihood table size mismatch".into()));
        }
        for row in likelihoods.chunks(num_classes) {
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-9 || row.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                return Err(BalanceError::Config(
                    "likelihood rows must be probability vectors".into(),
                ));
            }
        }
        if distances.len() != n * n {
            return Err(BalanceError::Config("distance matrix size mismatch".into()));
        }
        for i in 0..n {
            if distances[i * n + i] != 0.0 {
                return Err(BalanceError::Config("distance diagonal must be zero".into()));
            }
            for j in 0..n {
                let d = distances[i * n + j];
                if !(0.0..=1.0).contains(&d) || (d - distances[j * n + i]).abs() > 1e-12 {
                    return Err(BalanceError::Config(
                        "distances must be symmetric and within [0, 1]".into(),
                    ));
                }
            }
        }
        Ok(Self {
            num_hypotheses: n,
            num_points,
            num_classes,
            prior,
            likelihoods,
            distances,
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

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    #[inline]
    pub fn likelihood(&self, hypothesis: usize, point: usize, label: usize) -> f64 {
        self.likelihoods[(hypothesis * self.num_points + point) * self.num_classes + label]
    }

    pub fn likelihood_row(&self, hypothesis: usize, point: usize) -> &[f64] {
        let base = (hypothesis * self.num_points + point) * self.num_classes;
        &self.likelihoods[base..base + self.num_classes]
    }

    #[inline]
    pub fn distance(&self, a: usize, b: usize) -> f64 {
        self.distances[a * self.num_hypotheses + b]
    }

    /// True when every likelihood entry is exactly 0 or 1.
    pub fn is_deterministic(&self) -> bool {
        self.likelihoods.iter().all(|&p| p == 0.0 || p == 1.0)
    }

    /// The hypotheses' predictive rows as a prediction tensor.
    pub fn prediction_tensor(&self) -> PredictionTensor {
        PredictionTensor::from_probs(
            self.num_hypotheses,
            self.num_points,
            self.num_classes,
            self.likelihoods.clone(),
        )
        .expect("validated likelihood tables form a tensor")
    }

    /// Equivalence classes by farthest-first traversal of the stored
    /// distances with center radius `radius`.
    pub fn fft_partition(&self, radius: f64, start: usize) -> Partition {
        fft_cluster_by(self.num_hypotheses, radius, start, |a, b| self.distance(a, b))
    }
}

fn edge_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

/// Unnormalized hypothesis weights plus per-pair edge weights.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorState {
    num_hypotheses: usize,
    weights: Vec<f64>,
    /// Upper-triangle pair weights, initialized to `p(h) p(h')`.
    edge_weights: Vec<f64>,
}

impl PosteriorState {
    pub fn new(space: &DiscreteHypothesisSpace) -> Self {
        let n = space.num_hypotheses;
        let mut edge_weights = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in (i + 1)..n {
                edge_weights.push(space.prior[i] * space.prior[j]);
            }
        }
        Self {
            num_hypotheses: n,
            weights: space.prior.clone(),
            edge_weights,
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn edge_weight(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        let (a, b) = (i.min(j), i.max(j));
        self.edge_weights[edge_index(self.num_hypotheses, a, b)]
    }

    pub fn normalized_weights(&self) -> Result<Vec<f64>> {
        let total: f64 = self.weights.iter().sum();
        if total <= 0.0 {
            return Err(BalanceError::InconsistentObservation);
        }
        Ok(self.weights.iter().map(|&w| w / total).collect())
    }

    /// Hypothesis indices with strictly positive weight.
    pub fn support(&self) -> Vec<usize> {
        (0..self.num_hypotheses)
            .filter(|&h| self.weights[h] > 0.0)
            .collect()
    }

    /// Largest pairwise distance within the current support.
    pub fn support_diameter(&self, space: &DiscreteHypothesisSpace) -> f64 {
        let support = self.support();
        let mut diameter = 0.0f64;
        for (i, &a) in support.iter().enumerate() {
            for &b in &support[i + 1..] {
                diameter = diameter.max(space.distance(a, b));
            }
        }
        diameter
    }

    /// Multiplies each hypothesis weight by the observation likelihood.
    /// Normalization is deferred to readers.
    pub fn bayes_update(
        &mut self,
        space: &DiscreteHypothesisSpace,
        point: usize,
        label: usize,
    ) -> Result<()> {
        let updated: Vec<f64> = self
            .weights
            .iter()
            .enumerate()
            .map(|(h, &w)| w * space.likelihood(h, point, label))
            .collect();
        if updated.iter().all(|&w| w <= 0.0) {
            return Err(BalanceError::InconsistentObservation);
        }
        self.weights = updated;
        Ok(())
    }

    /// Discounts every pair weight by both endpoints' likelihoods and
    /// applies the same multiplicative update to the hypothesis weights.
    pub fn eced_update(&mut self, space: &DiscreteHypothesisSpace, point: usize, label: usize) {
        let n = self.num_hypotheses;
        for i in 0..n {
            for j in (i + 1)..n {
                let factor = space.likelihood(i, point, label) * space.likelihood(j, point, label);
                self.edge_weights[edge_index(n, i, j)] *= factor;
            }
        }
        for (h, w) in self.weights.iter_mut().enumerate() {
            *w *= space.likelihood(h, point, label);
        }
    }
}

fn cross_edges(partition: &Partition) -> Vec<(usize, usize)> {
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

/// Expected newly-cut edge weight of querying `point` (noise-free spaces
/// only). An edge is cut by outcome `y` when at least one endpoint assigns
/// it zero likelihood; already-cut edges carry zero weight.
pub fn ec2_score(
    space: &DiscreteHypothesisSpace,
    state: &PosteriorState,
    partition: &Partition,
    point: usize,
) -> Result<f64> {
    if !space.is_deterministic() {
        return Err(BalanceError::NoisyLikelihoods);
    }
    let posterior = state.normalized_weights()?;
    let edges = cross_edges(partition);
    let mut total = 0.0;
    for label in 0..space.num_classes {
        let mass: f64 = (0..space.num_hypotheses)
            .map(|h| posterior[h] * space.likelihood(h, point, label))
            .sum();
        if mass <= 0.0 {
            continue;
        }
        let mut cut = 0.0;
        for &(i, j) in &edges {
            let consistent =
                space.likelihood(i, point, label) > 0.0 && space.likelihood(j, point, label) > 0.0;
            if !consistent {
                cut += state.edge_weight(i, j);
            }
        }
        total += mass * cut;
    }
    Ok(total)
}

/// Expected edge-weight discount minus the non-informativeness offset.
///
/// For every outcome `y` each cross-class edge contributes
/// `W * (max_h lam_h(y)^2 - lam_i(y) lam_j(y))`, which is the discounted
/// weight `1 - lam lam'` minus the offset `1 - max_h lam^2`. A point whose
/// likelihood rows are identical across hypotheses scores exactly zero.
pub fn eced_score(
    space: &DiscreteHypothesisSpace,
    state: &PosteriorState,
    partition: &Partition,
    point: usize,
) -> Result<f64> {
    let posterior = state.normalized_weights()?;
    let n = space.num_hypotheses;
    let c = space.num_classes;
    let mut lambda = vec![0.0f64; n * c];
    for h in 0..n {
        let row = space.likelihood_row(h, point);
        let max = row.iter().cloned().fold(0.0, f64::max);
        if max <= 0.0 {
            return Err(BalanceError::Config("all-zero likelihood row".into()));
        }
        for y in 0..c {
            lambda[h * c + y] = row[y] / max;
        }
    }
    let edges = cross_edges(partition);
    let mut total = 0.0;
    for label in 0..c {
        let mass: f64 = (0..n)
            .map(|h| posterior[h] * space.likelihood(h, point, label))
            .sum();
        if mass <= 0.0 {
            continue;
        }
        let max_sq = (0..n)
            .map(|h| lambda[h * c + label] * lambda[h * c + label])
            .fold(0.0, f64::max);
        let mut value = 0.0;
        for &(i, j) in &edges {
            value += state.edge_weight(i, j)
                * (max_sq - lambda[i * c + label] * lambda[j * c + label]);
        }
        total += mass * value;
    }
    Ok(total)
}

/// Exact mutual information between a point's label and the hypothesis under
/// the current normalized posterior, in bits.
pub fn bald_exact(
    space: &DiscreteHypothesisSpace,
    state: &PosteriorState,
    point: usize,
) -> Result<f64> {
    let posterior = state.normalized_weights()?;
    let c = space.num_classes;
    let mut predictive = vec![0.0f64; c];
    let mut conditional = 0.0;
    for (h, &weight) in posterior.iter().enumerate() {
        let row = space.likelihood_row(h, point);
        for (acc, &p) in predictive.iter_mut().zip(row) {
            *acc += weight * p;
        }
        conditional += weight * entropy_bits(row);
    }
    Ok((entropy_bits(&predictive) - conditional).max(0.0))
}

/// The analytically scaled hypothesis chain: `n` hypotheses, `n - 1` binary
/// points with `h_j(x_i) = 1` iff `j <= i`, and declared distances
/// `d(h_i, h_j) = 2^(1-i) - 2^(1-j)` for `i < j` (1-indexed), stored
/// explicitly in the distance matrix.
pub fn stylized_space(n: usize) -> Result<DiscreteHypothesisSpace> {
    if n < 2 {
        return Err(BalanceError::Config("need at least two hypotheses".into()));
    }
    let points = n - 1;
    let prior = vec![1.0 / n as f64; n];
    let mut likelihoods = Vec::with_capacity(n * points * 2);
    for h in 0..n {
        for x in 0..points {
            if h <= x {
                likelihoods.extend_from_slice(&[0.0, 1.0]);
            } else {
                likelihoods.extend_from_slice(&[1.0, 0.0]);
            }
        }
    }
    let mut distances = vec![0.0f64; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = (0.5f64).powi(i as i32) - (0.5f64).powi(j as i32);
            distances[i * n + j] = d;
            distances[j * n + i] = d;
        }
    }
    DiscreteHypothesisSpace::new(prior, likelihoods, distances, points, 2)
}

/// Query-selection strategies for [`run_policy`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Policy {
    /// Checks hypotheses in index order by querying `x_1, x_2, ...`.
    EcAware,
    /// Maximizes exact mutual information each step.
    Bald,
    /// Maximizes expected newly-cut edge weight (noise-free only).
    Ec2,
    /// Maximizes the edge-discounting score.
    Eced,
    /// Uniform random unqueried point.
    Random,
}

/// Replayable record of one policy run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolicyTrace {
    pub policy: Policy,
    pub sigma: f64,
    pub target: usize,
    /// Queried point indices with the labels observed.
    pub queries: Vec<(usize, u32)>,
    /// Support diameter after each query (the error proxy).
    pub diameters: Vec<f64>,
    /// Number of queries issued.
    pub cost: usize,
}

/// Runs a policy against the realized `target` hypothesis until the
/// nonzero-posterior support has pairwise diameter at most `sigma`.
///
/// Labels come from the target's likelihood row: deterministic rows yield
/// their supported label, noisy rows are sampled. Caps the number of queries
/// at `n` (and at the number of available points).
pub fn run_policy<R: Rng>(
    space: &DiscreteHypothesisSpace,
    policy: Policy,
    target: usize,
    sigma: f64,
    rng: &mut R,
) -> Result<PolicyTrace> {
    if !(0.0..1.0).contains(&sigma) || sigma <= 0.0 {
        return Err(BalanceError::Config(format!("sigma {sigma} outside (0, 1)")));
    }
    if target >= space.num_hypotheses {
        return Err(BalanceError::Config(format!("target {target} out of range")));
    }
    let cap = space.num_hypotheses;
    let partition = match policy {
        Policy::Ec2 | Policy::Eced => Some(space.fft_partition(sigma / 2.0, 0)),
        _ => None,
    };
    let mut state = PosteriorState::new(space);
    let mut queried = vec![false; space.num_points];
    let mut trace = PolicyTrace {
        policy,
        sigma,
        target,
        queries: Vec::new(),
        diameters: Vec::new(),
        cost: 0,
    };
    while state.support_diameter(space) > sigma {
        if trace.queries.len() >= cap || queried.iter().all(|&q| q) {
            return Err(BalanceError::BudgetExhausted { cap });
        }
        let candidates: Vec<usize> = (0..space.num_points).filter(|&x| !queried[x]).collect();
        let point = match policy {
            Policy::EcAware => candidates[0],
            Policy::Random => candidates[rng.gen_range(0..candidates.len())],
            Policy::Bald => {
                argmax_by(&candidates, |&x| bald_exact(space, &state, x))?
            }
            Policy::Ec2 => {
                let p = partition.as_ref().unwrap();
                argmax_by(&candidates, |&x| ec2_score(space, &state, p, x))?
            }
            Policy::Eced => {
                let p = partition.as_ref().unwrap();
                argmax_by(&candidates, |&x| eced_score(space, &state, p, x))?
            }
        };
        let label = observe(space, target, point, rng);
        state.eced_update(space, point, label);
        if state.weights().iter().all(|&w| w <= 0.0) {
            return Err(BalanceError::InconsistentObservation);
        }
        queried[point] = true;
        trace.queries.push((point, label as u32));
        trace.diameters.push(state.support_diameter(space));
    }
    trace.cost = trace.queries.len();
    Ok(trace)
}

/// Maximum policy cost over every possible target hypothesis.
pub fn worst_case_cost<R: Rng>(
    space: &DiscreteHypothesisSpace,
    policy: Policy,
    sigma: f64,
    rng: &mut R,
) -> Result<usize> {
    let mut worst = 0;
    for target in 0..space.num_hypotheses {
        if space.prior[target] <= 0.0 {
            continue;
        }
        let trace = run_policy(space, policy, target, sigma, rng)?;
        worst = worst.max(trace.cost);
    }
    Ok(worst)
}

fn argmax_by<F>(candidates: &[usize], mut score: F) -> Result<usize>
where
    F: FnMut(&usize) -> Result<f64>,
{
    let mut best = candidates[0];
    let mut best_score = score(&candidates[0])?;
    for &x in &candidates[1..] {
        let s = score(&x)?;
        if s > best_score {
            best = x;
            best_score = s;
        }
    }
    Ok(best)
}

fn observe<R: Rng>(
    space: &DiscreteHypothesisSpace,
    target: usize,
    point: usize,
    rng: &mut R,
) -> usize {
    let row = space.likelihood_row(target, point);
    let mut u = rng.gen::<f64>();
    for (label, &p) in row.iter().enumerate() {
        if u < p {
            return label;
        }
        u -= p;
    }
    row.len() - 1
}

/// Literal nested-loop evaluation of the batch acquisition score.
///
/// Recomputes pair activity from the reference labels and `tau`, evaluates
/// every per-pair joint probability by an explicit per-point product, and
/// finds the per-hypothesis maxima by scanning all configurations. No
/// caching, no matrix recurrences, no sampling: this is the verification
/// oracle for the fast paths, kept deliberately independent of them.
pub fn brute_force_delta(
    pairs: &[(usize, usize)],
    tensor: &PredictionTensor,
    ref_labels: &LabelMatrix,
    tau: f64,
    batch: &[usize],
) -> Result<f64> {
    if pairs.len() > 8 {
        return Err(BalanceError::Config("oracle capped at 8 pairs".into()));
    }
    let c = tensor.num_classes();
    let configs = (c as u128).checked_pow(batch.len() as u32).unwrap_or(u128::MAX);
    if configs > 10_000 {
        return Err(BalanceError::EnumerationCap {
            configs,
            cap: 10_000,
        });
    }
    let configs = configs as usize;
    let k = pairs.len();

    let joint = |hypothesis: usize, cfg: usize| -> f64 {
        let mut rest = cfg;
        let mut prob = 1.0;
        for &point in batch.iter().rev() {
            prob *= tensor.row(hypothesis, point)[rest % c];
            rest /= c;
        }
        prob
    };
    let max_joint = |hypothesis: usize| -> f64 {
        let mut max = 0.0f64;
        for cfg in 0..configs {
            max = max.max(joint(hypothesis, cfg));
        }
        max
    };

    let mut active = Vec::with_capacity(k);
    for &(a, b) in pairs {
        let ra = ref_labels.row(a);
        let rb = ref_labels.row(b);
        let mut differing = 0usize;
        for (x, y) in ra.iter().zip(rb) {
            if x != y {
                differing += 1;
            }
        }
        active.push(differing as f64 / ra.len() as f64 > tau);
    }

    let mut total = 0.0;
    for cfg in 0..configs {
        let mut mixture = 0.0;
        for &(a, b) in pairs {
            mixture += joint(a, cfg) + joint(b, cfg);
        }
        let mut discount = 0.0;
        for (idx, &(a, b)) in pairs.iter().enumerate() {
            if !active[idx] {
                continue;
            }
            let lam_a = joint(a, cfg).max(PROB_FLOOR) / max_joint(a).max(PROB_FLOOR);
            let lam_b = joint(b, cfg).max(PROB_FLOOR) / max_joint(b).max(PROB_FLOOR);
            discount += 1.0 - lam_a * lam_b;
        }
        total += mixture / (2.0 * k as f64) * (discount / k as f64);
    }
    Ok(total)
}
