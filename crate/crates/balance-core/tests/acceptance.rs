//! Acceptance suite. Each test checks one release criterion at its stated
//! tolerance and prints a `ACCEPTANCE <n> <name>: PASS` line.
//!
//! Criterion 12 (CLI determinism) lives in the CLI crate's test suite.

use std::time::Instant;

use balance_core::selection::StateMode;
use balance_core::*;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_labels<R: Rng>(rows: usize, width: usize, classes: u32, rng: &mut R) -> LabelMatrix {
    let data: Vec<Vec<u32>> = (0..rows)
        .map(|_| (0..width).map(|_| rng.gen_range(0..classes)).collect())
        .collect();
    LabelMatrix::from_rows(&data).unwrap()
}

fn disjoint_pairs(k: usize) -> Vec<(usize, usize)> {
    (0..k).map(|i| (2 * i, 2 * i + 1)).collect()
}

/// Criterion 1: the fast exact path agrees with the literal nested-loop
/// oracle within 1e-9 on 500+ random instances.
#[test]
fn acceptance_01_oracle_equivalence() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let mut max_dev = 0.0f64;
    let mut instances = 0;
    for trial in 0..500 {
        let k = 1 + trial % 4;
        let c = 2 + trial % 2;
        let b = 1 + trial % 3;
        let s = 2 * k;
        let tensor = random_tensor(s, b + 2, c, &mut rng);
        let ref_labels = random_labels(s, 6, c as u32, &mut rng);
        let tau: f64 = rng.gen_range(0.0..1.0);
        let pair_idx = disjoint_pairs(k);
        let batch: Vec<usize> = (0..b).collect();

        let mask = edge_mask(&pair_idx, &ref_labels, tau).unwrap();
        let pairs = EnsemblePairs::new(pair_idx.clone(), mask).unwrap();
        let fast = balance_exact(&batch, &pairs, &tensor).unwrap();
        let oracle = brute_force_delta(&pair_idx, &tensor, &ref_labels, tau, &batch).unwrap();
        max_dev = max_dev.max((fast - oracle).abs());
        instances += 1;
    }
    let elapsed = start.elapsed();
    assert!(instances >= 500);
    assert!(max_dev <= 1e-9, "max deviation {max_dev}");
    assert!(elapsed.as_secs() < 30, "took {elapsed:?}");
    println!("ACCEPTANCE 01 oracle-equivalence: PASS (max dev {max_dev:.2e}, {elapsed:?})");
}

/// `(p, p_alt, a_max, b_max, proposal)` recomputed entry by entry.
type NaiveState = (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>);

/// Naive per-entry recomputation of the exact-mode matrices.
fn naive_exact_state(
    batch: &[usize],
    pairs: &EnsemblePairs,
    tensor: &PredictionTensor,
) -> NaiveState {
    let k = pairs.len();
    let c = tensor.num_classes();
    let m = c.pow(batch.len() as u32);
    let joint = |h: usize, cfg: usize| -> f64 {
        let mut rest = cfg;
        let mut prob = 1.0;
        for &point in batch.iter().rev() {
            prob *= tensor.row(h, point)[rest % c];
            rest /= c;
        }
        prob
    };
    let mut p = vec![0.0; m * k];
    let mut p_alt = vec![0.0; m * k];
    let mut proposal = vec![0.0; m];
    for cfg in 0..m {
        for (idx, &(a, b)) in pairs.pairs().iter().enumerate() {
            p[cfg * k + idx] = joint(a, cfg);
            p_alt[cfg * k + idx] = joint(b, cfg);
            proposal[cfg] += p[cfg * k + idx] + p_alt[cfg * k + idx];
        }
        proposal[cfg] /= 2.0 * k as f64;
    }
    let mut a_max = vec![0.0; k];
    let mut b_max = vec![0.0; k];
    for (idx, &(a, b)) in pairs.pairs().iter().enumerate() {
        for &point in batch {
            // recompute per-point maxima the slow way
            let amax = tensor.row(a, point).iter().cloned().fold(0.0, f64::max);
            let bmax = tensor.row(b, point).iter().cloned().fold(0.0, f64::max);
            if a_max[idx] == 0.0 {
                a_max[idx] = 1.0;
                b_max[idx] = 1.0;
            }
            a_max[idx] *= amax;
            b_max[idx] *= bmax;
        }
    }
    (p, p_alt, a_max, b_max, proposal)
}

/// Criterion 2: incremental extension equals from-scratch recomputation
/// within 1e-12, in both exact and sampled modes.
#[test]
fn acceptance_02_recurrence_correctness() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2002);
    for trial in 0..100u64 {
        let k = 1 + (trial as usize) % 3;
        let c = 2 + (trial as usize) % 2;
        let tensor = random_tensor(2 * k, 8, c, &mut rng);
        let pairs = EnsemblePairs::new(
            disjoint_pairs(k),
            (0..k).map(|i| i % 2 == 0).collect(),
        )
        .unwrap();

        // exact mode up to b = 3
        let mut state = BatchState::empty(&pairs, c);
        let batch: Vec<usize> = vec![0, 3, 5];
        for (i, &x) in batch.iter().enumerate() {
            state = state.extend(x, &pairs, &tensor, &mut rng).unwrap();
            let (p, p_alt) = state.probs();
            let (a, a_alt) = state.maxima();
            let (np, np_alt, na, na_alt, nprop) =
                naive_exact_state(&batch[..=i], &pairs, &tensor);
            for (have, want) in p.iter().zip(&np).chain(p_alt.iter().zip(&np_alt)) {
                assert!((have - want).abs() <= 1e-12);
            }
            for (have, want) in a.iter().zip(&na).chain(a_alt.iter().zip(&na_alt)) {
                assert!((have - want).abs() <= 1e-12);
            }
            for (have, want) in state.proposal_mass().iter().zip(&nprop) {
                assert!((have - want).abs() <= 1e-12);
            }
        }

        // sampled mode out to b = 6: replay the stored label columns
        let mut sampled = state.into_sampled(40, &mut rng);
        for &x in &[1usize, 2, 6] {
            sampled = sampled.extend(x, &pairs, &tensor, &mut rng).unwrap();
        }
        assert_eq!(sampled.mode(), StateMode::Sampled);
        let all_points = [0usize, 3, 5, 1, 2, 6];
        let (p, p_alt) = sampled.probs();
        let labels = sampled.config_labels();
        let kk = pairs.len();
        for cfg in 0..sampled.num_configs() {
            for (idx, &(a, b)) in pairs.pairs().iter().enumerate() {
                let mut want_a = 1.0;
                let mut want_b = 1.0;
                for (step, &point) in all_points.iter().enumerate() {
                    let y = labels[step][cfg] as usize;
                    want_a *= tensor.row(a, point)[y];
                    want_b *= tensor.row(b, point)[y];
                }
                assert!((p[cfg * kk + idx] - want_a).abs() <= 1e-12);
                assert!((p_alt[cfg * kk + idx] - want_b).abs() <= 1e-12);
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 30, "took {elapsed:?}");
    println!("ACCEPTANCE 02 recurrence-correctness: PASS ({elapsed:?})");
}

/// Criterion 3: the M=10,000 importance-sampling estimator lands within 2%
/// median relative error of exact enumeration at b=4, and the error shrinks
/// monotonically in M over {100, 1,000, 10,000}.
#[test]
fn acceptance_03_importance_sampling_consistency() {
    let start = Instant::now();
    let sample_counts = [100usize, 1_000, 10_000];
    let mut rel_errors = vec![Vec::new(); sample_counts.len()];
    for instance in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(3000 + instance);
        let k = 4;
        let tensor = random_tensor(2 * k, 6, 2, &mut rng);
        let pairs = EnsemblePairs::new(disjoint_pairs(k), vec![true; k]).unwrap();
        let batch = [0usize, 1, 2, 3];
        let exact = balance_exact(&batch, &pairs, &tensor).unwrap();
        assert!(exact > 0.0);

        let mut prefix = BatchState::empty(&pairs, 2);
        for &x in &batch[..3] {
            prefix = prefix.extend(x, &pairs, &tensor, &mut rng).unwrap();
        }
        for (slot, &m) in sample_counts.iter().enumerate() {
            let mut draw_rng = ChaCha8Rng::seed_from_u64(9000 + instance * 7 + slot as u64);
            let sampled = prefix.into_sampled(m, &mut draw_rng);
            let estimate = sampled.importance_delta(batch[3], &pairs, &tensor);
            rel_errors[slot].push((estimate - exact).abs() / exact);
        }
    }
    let medians: Vec<f64> = rel_errors
        .iter()
        .map(|errors| {
            let mut sorted = errors.clone();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            (sorted[9] + sorted[10]) / 2.0
        })
        .collect();
    let elapsed = start.elapsed();
    assert!(
        medians[2] <= 0.02,
        "median relative error at M=10,000 is {}",
        medians[2]
    );
    assert!(
        medians[0] >= medians[1] && medians[1] >= medians[2],
        "medians not monotone: {medians:?}"
    );
    assert!(elapsed.as_secs() < 120, "took {elapsed:?}");
    println!(
        "ACCEPTANCE 03 importance-sampling-consistency: PASS (medians {:.4} / {:.4} / {:.4}, {elapsed:?})",
        medians[0], medians[1], medians[2]
    );
}

/// Criterion 4: scores stay in [0, 1] and extending a batch never lowers the
/// score beyond float slack, on 1,000+ random exact-mode instances.
#[test]
fn acceptance_04_monotonicity_and_bounds() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4004);
    for trial in 0..1000 {
        let k = 1 + trial % 4;
        let c = 2 + trial % 2;
        let tensor = random_tensor(2 * k, 5, c, &mut rng);
        let mask: Vec<bool> = (0..k).map(|_| rng.gen_bool(0.7)).collect();
        let pairs = EnsemblePairs::new(disjoint_pairs(k), mask).unwrap();
        let base_len = 1 + trial % 2;
        let base: Vec<usize> = (0..base_len).collect();
        let extended: Vec<usize> = (0..=base_len).collect();
        let d_base = balance_exact(&base, &pairs, &tensor).unwrap();
        let d_ext = balance_exact(&extended, &pairs, &tensor).unwrap();
        assert!((0.0..=1.0 + 1e-12).contains(&d_base));
        assert!((0.0..=1.0 + 1e-12).contains(&d_ext));
        assert!(
            d_ext >= d_base - 1e-9,
            "extension lowered the score: {d_base} -> {d_ext}"
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 60, "took {elapsed:?}");
    println!("ACCEPTANCE 04 monotonicity-bounds: PASS ({elapsed:?})");
}

/// Criterion 5: constant predictive rows score exactly zero, and saturated
/// tau (no active edge) produces all-zero scores plus the uniform-random
/// fallback batch.
#[test]
fn acceptance_05_noninformative_zeroing() {
    // uniform rows: identical across samples and constant over labels
    for c in [2usize, 3, 5] {
        let k = 3;
        let row = vec![1.0 / c as f64; c];
        let data: Vec<f64> = row
            .iter()
            .cycle()
            .take(2 * k * 2 * c)
            .cloned()
            .collect();
        let tensor = PredictionTensor::from_probs(2 * k, 2, c, data).unwrap();
        let pairs = EnsemblePairs::new(disjoint_pairs(k), vec![true; k]).unwrap();
        assert_eq!(balance_exact(&[0], &pairs, &tensor).unwrap(), 0.0);
        assert_eq!(balance_exact(&[0, 1], &pairs, &tensor).unwrap(), 0.0);
    }
    // deterministic consensus rows also score exactly zero
    let mut data = Vec::new();
    for _ in 0..4 {
        data.extend_from_slice(&[1.0, 0.0]);
    }
    let consensus = PredictionTensor::from_probs(4, 1, 2, data).unwrap();
    let pairs = EnsemblePairs::new(disjoint_pairs(2), vec![true, true]).unwrap();
    assert_eq!(balance_exact(&[0], &pairs, &consensus).unwrap(), 0.0);

    // tau at or above the max pairwise distance disables every edge
    let mut rng = ChaCha8Rng::seed_from_u64(5005);
    let tensor = random_tensor(4, 12, 2, &mut rng);
    let ref_labels = tensor.hard_labels();
    let pair_idx = disjoint_pairs(2);
    let max_d = pair_idx
        .iter()
        .map(|&(a, b)| hamming_distance(ref_labels.row(a), ref_labels.row(b)).unwrap())
        .fold(0.0, f64::max);
    let mask = edge_mask(&pair_idx, &ref_labels, max_d).unwrap();
    assert!(mask.iter().all(|&m| !m), "tau at max distance leaves edges");
    let pairs = EnsemblePairs::new(pair_idx, mask).unwrap();
    let pool: Vec<usize> = (0..12).collect();
    let scores = pool_deltas(&pool, &pairs, &tensor).unwrap();
    assert!(scores.iter().all(|&s| s == 0.0));

    let config = SelectionConfig {
        batch_size: 4,
        num_pairs: 2,
        ..Default::default()
    };
    let batch_a = select_batch(&pool, &pairs, &tensor, &config, &mut ChaCha8Rng::seed_from_u64(1))
        .unwrap();
    let batch_b = select_batch(&pool, &pairs, &tensor, &config, &mut ChaCha8Rng::seed_from_u64(1))
        .unwrap();
    let batch_c = select_batch(&pool, &pairs, &tensor, &config, &mut ChaCha8Rng::seed_from_u64(2))
        .unwrap();
    assert_eq!(batch_a, batch_b, "fallback must be seed-deterministic");
    assert_ne!(batch_a, batch_c, "fallback must actually randomize");
    let unique: std::collections::HashSet<_> = batch_a.iter().collect();
    assert_eq!(unique.len(), 4);
    println!("ACCEPTANCE 05 noninformative-zeroing: PASS");
}

/// Criterion 6: on the stylized chain with sigma = 1/8 the index-checking
/// policy needs 3 queries worst-case while exact BALD needs log2(n).
#[test]
fn acceptance_06_stylized_example_gap() {
    let start = Instant::now();
    for n in [16usize, 64, 256] {
        let space = stylized_space(n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6006);
        let ec = worst_case_cost(&space, Policy::EcAware, 0.125, &mut rng).unwrap();
        let bald = worst_case_cost(&space, Policy::Bald, 0.125, &mut rng).unwrap();
        let expected_bald = (n as f64).log2().round() as usize;
        assert_eq!(ec, 3, "ec-aware worst case at n={n}");
        assert_eq!(bald, expected_bald, "bald worst case at n={n}");
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 10, "took {elapsed:?}");
    println!("ACCEPTANCE 06 stylized-example-gap: PASS ({elapsed:?})");
}

/// Criterion 7: edge discounting equals edge cutting on every deterministic
/// instance with up to 6 hypotheses over 3 binary points, and a
/// non-informative test scores exactly zero.
#[test]
#[allow(clippy::needless_range_loop)]
fn acceptance_07_ec2_eced_equivalence() {
    let start = Instant::now();
    let points = 3usize;
    let patterns: Vec<[usize; 3]> = (0..8)
        .map(|bits| [bits & 1, (bits >> 1) & 1, (bits >> 2) & 1])
        .collect();
    let mut max_dev = 0.0f64;
    let mut checked = 0u64;
    for n in 2..=6usize {
        let mut assignment = vec![0usize; n];
        loop {
            // build the deterministic space for this label table
            let mut likelihoods = Vec::with_capacity(n * points * 2);
            for h in 0..n {
                for &label in &patterns[assignment[h]][..points] {
                    if label == 0 {
                        likelihoods.extend_from_slice(&[1.0, 0.0]);
                    } else {
                        likelihoods.extend_from_slice(&[0.0, 1.0]);
                    }
                }
            }
            let mut distances = vec![0.0; n * n];
            for i in 0..n {
                for j in (i + 1)..n {
                    let differ = (0..points)
                        .filter(|&x| {
                            patterns[assignment[i]][x] != patterns[assignment[j]][x]
                        })
                        .count();
                    let d = differ as f64 / points as f64;
                    distances[i * n + j] = d;
                    distances[j * n + i] = d;
                }
            }
            let space = DiscreteHypothesisSpace::new(
                vec![1.0 / n as f64; n],
                likelihoods,
                distances,
                points,
                2,
            )
            .unwrap();
            let partition = space.fft_partition(0.3, 0);
            let state = PosteriorState::new(&space);
            for x in 0..points {
                let cut = ec2_score(&space, &state, &partition, x).unwrap();
                let discounted = eced_score(&space, &state, &partition, x).unwrap();
                max_dev = max_dev.max((cut - discounted).abs());
                assert!(cut >= 0.0);
                // zero expected cut weight iff no cross-class pair disagrees
                // on this point's label
                let cuttable = (0..n).any(|i| {
                    ((i + 1)..n).any(|j| {
                        partition.assignment[i] != partition.assignment[j]
                            && patterns[assignment[i]][x] != patterns[assignment[j]][x]
                    })
                });
                assert_eq!(cut == 0.0, !cuttable);
                let constant_column = (1..n)
                    .all(|h| patterns[assignment[h]][x] == patterns[assignment[0]][x]);
                if constant_column {
                    assert_eq!(discounted, 0.0, "non-informative test must score 0");
                    assert_eq!(cut, 0.0);
                }
                checked += 1;
            }
            // odometer over all 8^n label tables
            let mut digit = 0;
            loop {
                if digit == n {
                    break;
                }
                assignment[digit] += 1;
                if assignment[digit] < 8 {
                    break;
                }
                assignment[digit] = 0;
                digit += 1;
            }
            if digit == n {
                break;
            }
        }
    }
    // noisy non-informative point: identical rows, exact zero by cancellation
    let noisy = DiscreteHypothesisSpace::new(
        vec![0.3, 0.3, 0.4],
        vec![0.6, 0.4, 0.6, 0.4, 0.6, 0.4],
        vec![0.0, 0.5, 0.5, 0.5, 0.0, 0.5, 0.5, 0.5, 0.0],
        1,
        2,
    )
    .unwrap();
    let partition = noisy.fft_partition(0.2, 0);
    let state = PosteriorState::new(&noisy);
    assert_eq!(eced_score(&noisy, &state, &partition, 0).unwrap(), 0.0);

    let elapsed = start.elapsed();
    assert!(max_dev <= 1e-12, "max deviation {max_dev}");
    println!(
        "ACCEPTANCE 07 ec2-eced-equivalence: PASS ({checked} comparisons, max dev {max_dev:.2e}, {elapsed:?})"
    );
}

/// Criterion 8: the greedy exact path reproduces the exhaustive per-step
/// argmax on every small instance.
#[test]
fn acceptance_08_greedy_per_step_optimality() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8008);
    for trial in 0..60 {
        let k = 1 + trial % 3;
        let c = 2 + trial % 2;
        let pool_size = 4 + trial % 5;
        let b = 1 + trial % 3;
        let tensor = random_tensor(2 * k, pool_size, c, &mut rng);
        let mask: Vec<bool> = (0..k).map(|_| rng.gen_bool(0.8)).collect();
        let pairs = EnsemblePairs::new(disjoint_pairs(k), mask).unwrap();
        let pool: Vec<usize> = (0..pool_size).collect();
        let config = SelectionConfig {
            batch_size: b,
            num_pairs: k,
            ..Default::default()
        };
        let mut sel_rng = ChaCha8Rng::seed_from_u64(trial as u64);
        let greedy = greedy_select(&pool, &pairs, &tensor, &config, &mut sel_rng).unwrap();

        // exhaustive per-step argmax, recomputed from scratch each step
        let mut reference: Vec<usize> = Vec::new();
        for _ in 0..b {
            let mut best: Option<(usize, f64)> = None;
            for &x in pool.iter().filter(|x| !reference.contains(x)) {
                let mut batch = reference.clone();
                batch.push(x);
                let score = balance_exact(&batch, &pairs, &tensor).unwrap();
                let better = match best {
                    None => true,
                    Some((bx, bs)) => score > bs || (score == bs && x < bx),
                };
                if better {
                    best = Some((x, score));
                }
            }
            reference.push(best.unwrap().0);
        }
        assert_eq!(greedy, reference, "trial {trial}");
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 60, "took {elapsed:?}");
    println!("ACCEPTANCE 08 greedy-per-step-optimality: PASS ({elapsed:?})");
}

/// Criterion 9: Gumbel top-k power sampling realizes the power distribution.
#[test]
fn acceptance_09_power_sampling_distribution() {
    let scores = [1.0, 2.0, 4.0];
    let mut rng = ChaCha8Rng::seed_from_u64(9009);
    let mut counts = [0usize; 3];
    for _ in 0..10_000 {
        counts[power_sample(&scores, 1.0, 1, &mut rng)[0]] += 1;
    }
    let expected = [1.0 / 7.0, 2.0 / 7.0, 4.0 / 7.0];
    for (i, &want) in expected.iter().enumerate() {
        let got = counts[i] as f64 / 10_000.0;
        assert!(
            (got - want).abs() <= 0.02,
            "beta=1: index {i} frequency {got} vs {want}"
        );
    }
    let mut counts = [0usize; 3];
    for _ in 0..10_000 {
        counts[power_sample(&scores, 0.0, 1, &mut rng)[0]] += 1;
    }
    for (i, &count) in counts.iter().enumerate() {
        let got = count as f64 / 10_000.0;
        assert!(
            (got - 1.0 / 3.0).abs() <= 0.02,
            "beta=0: index {i} frequency {got} vs uniform"
        );
    }
    println!("ACCEPTANCE 09 power-sampling-distribution: PASS");
}

/// Criterion 10: clustering terminates inside the iteration cap, centroids
/// belong to their clusters, and the two-group fixture is recovered exactly
/// as by brute force over all centroid pairs.
#[test]
fn acceptance_10_clustering_contract() {
    let mut master = ChaCha8Rng::seed_from_u64(1010);
    for trial in 0..50 {
        let k = 1 + trial % 3;
        let subset_size = 10 + trial % 31;
        let b = 2 + trial % 7;
        let tensor = random_tensor(2 * k, subset_size, 2, &mut master);
        let pairs = EnsemblePairs::new(disjoint_pairs(k), vec![true; k]).unwrap();
        let subset: Vec<usize> = (0..subset_size).collect();
        let config = SelectionConfig {
            batch_size: b,
            num_pairs: k,
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(4000 + trial as u64);
        let out = balance_clustering(&subset, &pairs, &tensor, &config, &mut rng).unwrap();
        assert!(out.iterations <= 5, "trial {trial} ran {} iterations", out.iterations);
        assert_eq!(out.centroids.len(), b);
        let mut all_members: Vec<usize> = out.clusters.iter().flatten().cloned().collect();
        all_members.sort_unstable();
        assert_eq!(all_members, subset, "clusters must partition the subset");
        for (centroid, members) in out.centroids.iter().zip(&out.clusters) {
            assert!(members.contains(centroid), "centroid outside its cluster");
        }
        let unique: std::collections::HashSet<_> = out.centroids.iter().collect();
        assert_eq!(unique.len(), b);
    }

    // two well-separated duplicate groups: pair (0,1) tells group A apart,
    // pair (2,3) group B, so cross-group information overlap is zero
    let group = 6usize;
    let mut rows: Vec<Vec<f64>> = vec![Vec::new(); 4];
    for point in 0..2 * group {
        let (a_rows, b_rows) = if point < group {
            ([0.8, 0.2, 0.2, 0.8], [0.5, 0.5, 0.5, 0.5])
        } else {
            ([0.5, 0.5, 0.5, 0.5], [0.8, 0.2, 0.2, 0.8])
        };
        rows[0].extend_from_slice(&a_rows[0..2]);
        rows[1].extend_from_slice(&a_rows[2..4]);
        rows[2].extend_from_slice(&b_rows[0..2]);
        rows[3].extend_from_slice(&b_rows[2..4]);
    }
    let data: Vec<f64> = rows.into_iter().flatten().collect();
    let tensor = PredictionTensor::from_probs(4, 2 * group, 2, data).unwrap();
    let pairs = EnsemblePairs::new(vec![(0, 1), (2, 3)], vec![true, true]).unwrap();
    let subset: Vec<usize> = (0..2 * group).collect();
    let config = SelectionConfig {
        batch_size: 2,
        num_pairs: 2,
        ..Default::default()
    };
    // brute force over all centroid pairs: maximize total within-cluster info
    let info = |x: usize, y: usize| info_measure(x, y, &pairs, &tensor).unwrap();
    let mut best: Option<((usize, usize), f64, Vec<usize>)> = None;
    for u in 0..2 * group {
        for v in (u + 1)..2 * group {
            let mut objective = 0.0;
            let mut assign = vec![0usize; 2 * group];
            for (x, slot) in assign.iter_mut().enumerate() {
                let iu = info(x, u);
                let iv = info(x, v);
                if iv > iu {
                    *slot = 1;
                    objective += iv;
                } else {
                    objective += iu;
                }
            }
            if best.as_ref().is_none_or(|(_, obj, _)| objective > *obj) {
                best = Some(((u, v), objective, assign));
            }
        }
    }
    let (_, _, brute_assign) = best.unwrap();
    let brute_groups: [std::collections::BTreeSet<usize>; 2] = [
        (0..2 * group).filter(|&x| brute_assign[x] == 0).collect(),
        (0..2 * group).filter(|&x| brute_assign[x] == 1).collect(),
    ];

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let out = balance_clustering(&subset, &pairs, &tensor, &config, &mut rng).unwrap();
    let got: std::collections::BTreeSet<std::collections::BTreeSet<usize>> = out
        .clusters
        .iter()
        .map(|c| c.iter().cloned().collect())
        .collect();
    let want: std::collections::BTreeSet<std::collections::BTreeSet<usize>> =
        brute_groups.iter().cloned().collect();
    assert_eq!(got, want, "clustering must recover the brute-force grouping");
    println!("ACCEPTANCE 10 clustering-contract: PASS");
}

/// Criterion 11: farthest-first traversal achieves at most twice the optimal
/// k-center radius on every small random instance.
#[test]
fn acceptance_11_fft_two_approximation() {
    let mut rng = ChaCha8Rng::seed_from_u64(1111);
    for trial in 0..200 {
        let n = 2 + trial % 7;
        let classes = 2 + trial % 2;
        let labels = random_labels(n, 6, classes as u32, &mut rng);
        let tau: f64 = rng.gen_range(0.0..0.9);
        let partition = fft_cluster(&labels, tau, 0);
        let k = partition.centers.len();

        // brute-force optimal radius for the same k
        let dist = |a: usize, b: usize| {
            hamming_distance(labels.row(a), labels.row(b)).unwrap()
        };
        let mut best = f64::INFINITY;
        let mut subset: Vec<usize> = (0..k).collect();
        loop {
            let radius = (0..n)
                .map(|p| {
                    subset
                        .iter()
                        .map(|&c| dist(p, c))
                        .fold(f64::INFINITY, f64::min)
                })
                .fold(0.0, f64::max);
            best = best.min(radius);
            // next k-subset of 0..n
            let mut i = k;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                if subset[i] != i + n - k {
                    subset[i] += 1;
                    for j in (i + 1)..k {
                        subset[j] = subset[j - 1] + 1;
                    }
                    break;
                }
                if i == 0 {
                    subset.clear();
                    break;
                }
            }
            if subset.is_empty() {
                break;
            }
        }
        assert!(
            partition.radius <= 2.0 * best + 1e-12,
            "trial {trial}: fft radius {} vs optimal {best}",
            partition.radius
        );
    }
    println!("ACCEPTANCE 11 fft-two-approximation: PASS");
}
