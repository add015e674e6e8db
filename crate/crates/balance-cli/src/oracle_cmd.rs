//! The `oracle` command: seeded comparisons between fast paths and their
//! independent references.

use std::path::Path;

use balance_core::{
    balance_exact, brute_force_delta, edge_mask, random_tensor, BatchState, EnsemblePairs,
    LabelMatrix, PredictionTensor,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleFixture {
    pub seed: u64,
    pub instances: usize,
    pub tolerance: Option<f64>,
}

impl Default for OracleFixture {
    fn default() -> Self {
        Self {
            seed: 0,
            instances: 100,
            tolerance: None,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct OracleReport {
    pub op: String,
    pub instances: usize,
    pub max_abs_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn load_fixture(path: &Path) -> Result<OracleFixture, CliError> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("reading {}: {e}", path.display())))?;
    serde_json::from_str(&raw)
        .map_err(|e| CliError::data(format!("corrupted fixture {}: {e}", path.display())))
}

pub fn run_op(op: &str, fixture: &OracleFixture) -> Result<OracleReport, CliError> {
    if fixture.instances == 0 {
        return Err(CliError::config("fixture needs at least one instance".into()));
    }
    let (max_dev, default_tol) = match op {
        "balance-vs-bruteforce" => (balance_vs_bruteforce(fixture), 1e-9),
        "recurrence-vs-naive" => (recurrence_vs_naive(fixture)?, 1e-12),
        other => return Err(CliError::config(format!("unknown oracle op `{other}`"))),
    };
    let tolerance = fixture.tolerance.unwrap_or(default_tol);
    Ok(OracleReport {
        op: op.to_string(),
        instances: fixture.instances,
        max_abs_deviation: max_dev,
        tolerance,
        pass: max_dev <= tolerance,
    })
}

fn random_labels<R: Rng>(rows: usize, width: usize, classes: u32, rng: &mut R) -> LabelMatrix {
    let data: Vec<Vec<u32>> = (0..rows)
        .map(|_| (0..width).map(|_| rng.gen_range(0..classes)).collect())
        .collect();
    LabelMatrix::from_rows(&data).expect("non-empty rows")
}

fn disjoint_pairs(k: usize) -> Vec<(usize, usize)> {
    (0..k).map(|i| (2 * i, 2 * i + 1)).collect()
}

fn balance_vs_bruteforce(fixture: &OracleFixture) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(fixture.seed);
    let mut max_dev = 0.0f64;
    for trial in 0..fixture.instances {
        let k = 1 + trial % 4;
        let c = 2 + trial % 2;
        let b = 1 + trial % 3;
        let tensor = random_tensor(2 * k, b + 2, c, &mut rng);
        let ref_labels = random_labels(2 * k, 6, c as u32, &mut rng);
        let tau: f64 = rng.gen_range(0.0..1.0);
        let pair_idx = disjoint_pairs(k);
        let batch: Vec<usize> = (0..b).collect();
        let mask = edge_mask(&pair_idx, &ref_labels, tau).expect("valid tau");
        let pairs = EnsemblePairs::new(pair_idx.clone(), mask).expect("disjoint pairs");
        let fast = balance_exact(&batch, &pairs, &tensor).expect("within cap");
        let slow = brute_force_delta(&pair_idx, &tensor, &ref_labels, tau, &batch)
            .expect("within cap");
        max_dev = max_dev.max((fast - slow).abs());
    }
    max_dev
}

/// Per-entry from-scratch recomputation of the exact-mode matrices.
fn naive_joint(tensor: &PredictionTensor, hypothesis: usize, batch: &[usize], cfg: usize) -> f64 {
    let c = tensor.num_classes();
    let mut rest = cfg;
    let mut prob = 1.0;
    for &point in batch.iter().rev() {
        prob *= tensor.row(hypothesis, point)[rest % c];
        rest /= c;
    }
    prob
}

fn recurrence_vs_naive(fixture: &OracleFixture) -> Result<f64, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(fixture.seed);
    let mut max_dev = 0.0f64;
    for trial in 0..fixture.instances {
        let k = 1 + trial % 3;
        let c = 2 + trial % 2;
        let tensor = random_tensor(2 * k, 6, c, &mut rng);
        let pairs =
            EnsemblePairs::new(disjoint_pairs(k), vec![true; k]).expect("disjoint pairs");
        let mut state = BatchState::empty(&pairs, c);
        let batch = [0usize, 2, 4];
        for (i, &x) in batch.iter().enumerate() {
            state = state
                .extend(x, &pairs, &tensor, &mut rng)
                .map_err(CliError::from_core)?;
            let (p, p_alt) = state.probs();
            let m = state.num_configs();
            for cfg in 0..m {
                for (idx, &(a, b)) in pairs.pairs().iter().enumerate() {
                    let want_a = naive_joint(&tensor, a, &batch[..=i], cfg);
                    let want_b = naive_joint(&tensor, b, &batch[..=i], cfg);
                    max_dev = max_dev.max((p[cfg * k + idx] - want_a).abs());
                    max_dev = max_dev.max((p_alt[cfg * k + idx] - want_b).abs());
                }
            }
        }
    }
    Ok(max_dev)
}
