//! Bayesian active-learning acquisition over posterior-ensemble predictions.
//!
//! The library scores unlabeled points (and batches of points) by how well
//! their labels would tell apart disagreeing pairs of posterior samples,
//! and builds query batches around that score:
//!
//! - [`tensor`] / [`tensor_io`]: prediction tensors, hard labels, Hamming
//!   distances, and the BLNC v1 file format with its JSON mirror;
//! - [`ensemble`]: hypothesis pairing, edge activity under a threshold
//!   `tau`, and `tau` annealing schedules;
//! - [`acquisition`]: the pairwise discount score plus BALD, BatchBALD,
//!   mean-std, and variation-ratio baselines;
//! - [`selection`]: greedy batch construction with cached matrix
//!   recurrences, importance sampling for large batches, Gumbel top-k power
//!   sampling, and information-measure clustering;
//! - [`partition`]: explicit equivalence classes via farthest-first
//!   traversal and the partition-based acquisition variant;
//! - [`oracle`]: exact Bayesian updates and acquisition scores on
//!   enumerable hypothesis spaces, policy simulation, and the brute-force
//!   verification oracle;
//! - [`synthetic`]: Dirichlet ensemble fixtures.

pub mod acquisition;
pub mod ensemble;
pub mod error;
pub mod oracle;
pub mod partition;
pub mod selection;
pub mod synthetic;
pub mod tensor;
pub mod tensor_io;

pub use acquisition::{
    bald_point, balance_exact, batchbald_exact, likelihood_ratio, mean_std, variation_ratio,
};
pub use ensemble::{edge_mask, pair_hypotheses, EnsemblePairs, TauSchedule};
pub use error::{BalanceError, Result};
pub use oracle::{
    bald_exact, brute_force_delta, ec2_score, eced_score, run_policy, stylized_space,
    worst_case_cost, DiscreteHypothesisSpace, Policy, PolicyTrace, PosteriorState,
};
pub use partition::{fft_cluster, fft_cluster_by, induced_edges, partition_delta, Partition};
pub use selection::{
    balance_clustering, greedy_select, greedy_select_scored, info_measure, pool_deltas,
    power_sample, select_batch, subsample_size, BatchState, ClusteringOutcome, SelectionConfig,
    StateMode,
};
pub use synthetic::{random_tensor, synthesize_ensemble};
pub use tensor::{hamming_distance, LabelMatrix, PredictionTensor};
pub use tensor_io::{read_tensor, write_tensor, write_tensor_json, Dtype};
