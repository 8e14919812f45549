//! Independent oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use tdcurriculum::corpus::{Corpus, Example, LabelMap, SparseVec, Split, SynthSpec};
use tdcurriculum::pipeline::ExperimentConfig;
use tdcurriculum::trainer::{loss_and_grad, ModelParams, TrainConfig};

/// Confidence, correctness and variability evaluated straight from their
/// definitions: plain sums, two-pass population variance.
pub fn dynamics_oracle(probs: &[f64], corrects: &[bool]) -> (f64, usize, f64) {
    let e = probs.len() as f64;
    let mut sum = 0.0;
    for p in probs {
        sum += p;
    }
    let mean = sum / e;
    let mut sq = 0.0;
    for p in probs {
        sq += (p - mean) * (p - mean);
    }
    let count = corrects.iter().filter(|&&c| c).count();
    (mean, count, (sq / e).sqrt())
}

/// Relative error between the analytic gradient and central differences.
pub fn gradient_relative_error(params: &ModelParams, batch: &[&Example], l2: f64, h: f64) -> f64 {
    let (_, grads) = loss_and_grad(params, batch, l2).unwrap();
    let analytic = grads.flat(params);
    let theta = params.flat();
    let mut probe = params.clone();
    let mut numeric = vec![0.0; theta.len()];
    for i in 0..theta.len() {
        let mut t = theta.clone();
        t[i] = theta[i] + h;
        probe.set_flat(&t);
        let up = loss_and_grad(&probe, batch, l2).unwrap().0;
        t[i] = theta[i] - h;
        probe.set_flat(&t);
        let down = loss_and_grad(&probe, batch, l2).unwrap().0;
        numeric[i] = (up - down) / (2.0 * h);
    }
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: Vec<f64> = analytic.iter().zip(&numeric).map(|(a, n)| a - n).collect();
    norm(&diff) / norm(&analytic).max(norm(&numeric)).max(1e-12)
}

/// Random dense example with `dim` features and a label below `classes`.
pub fn random_example(rng: &mut impl Rng, id: usize, dim: usize, classes: usize) -> Example {
    let mut pairs = Vec::new();
    for i in 0..dim as u32 {
        if rng.random_bool(0.7) {
            pairs.push((i, rng.random_range(-1.0..1.0)));
        }
    }
    Example::with_features(
        format!("x{id}"),
        "",
        None,
        rng.random_range(0..classes),
        SparseVec::from_pairs(pairs),
    )
}

/// Stage-k pool size: its own bucket plus `floor(|d_j| / divisor)` carried
/// from each earlier bucket.
pub fn stage_pool_oracle(bucket_sizes: &[usize], divisor: usize) -> Vec<usize> {
    (0..bucket_sizes.len())
        .map(|k| bucket_sizes[k] + bucket_sizes[..k].iter().map(|d| d / divisor).sum::<usize>())
        .collect()
}

/// Exact randomization p-value: the share of all 2^n swap patterns whose
/// statistic reaches the observed one.
pub fn ar_exhaustive(a: &[bool], b: &[bool]) -> f64 {
    let n = a.len();
    let d: Vec<i64> = a.iter().zip(b).map(|(&x, &y)| x as i64 - y as i64).collect();
    let observed = d.iter().sum::<i64>().abs();
    let mut hits = 0u64;
    for mask in 0u64..(1 << n) {
        let s: i64 = (0..n).map(|i| if mask >> i & 1 == 1 { -d[i] } else { d[i] }).sum();
        if s.abs() >= observed {
            hits += 1;
        }
    }
    hits as f64 / (1u64 << n) as f64
}

/// Corpus of explicit feature vectors with labels `c0..`.
pub fn corpus_from(split: Split, examples: Vec<Example>, classes: usize, dim: usize) -> Corpus {
    let labels = LabelMap::from_labels((0..classes).map(|c| format!("c{c}")));
    Corpus::new(split, examples, labels, dim, true).unwrap()
}

/// Synthetic corpus plus training setup pinned for the scaled-down checks.
pub fn pilot_config() -> ExperimentConfig {
    config_for(
        SynthSpec {
            num_classes: 3,
            train_size: 2000,
            val_size: 500,
            test_size: 500,
            feature_dim: 32,
            class_separation: 3.0,
            label_noise_fraction: 0.1,
            ood_shift: 1.5,
            seed: 0,
        },
        TrainConfig {
            epochs: 6,
            batch_size: 32,
            learning_rate: 0.5,
            ..TrainConfig::default()
        },
    )
}

/// A few hundred examples; fast enough for pipeline plumbing tests.
pub fn small_config() -> ExperimentConfig {
    let mut cfg = config_for(
        SynthSpec {
            num_classes: 3,
            train_size: 300,
            val_size: 90,
            test_size: 90,
            feature_dim: 16,
            class_separation: 3.0,
            label_noise_fraction: 0.1,
            ood_shift: 1.5,
            seed: 11,
        },
        TrainConfig {
            epochs: 3,
            batch_size: 16,
            learning_rate: 0.5,
            eval_per_epoch: 4,
            ..TrainConfig::default()
        },
    );
    cfg.seeds = vec![1, 2];
    cfg.cross_review.num_subsets = 3;
    cfg.ar_rounds = 2000;
    cfg.workers = 2;
    cfg
}

fn config_for(spec: SynthSpec, train: TrainConfig) -> ExperimentConfig {
    serde_json::from_value(serde_json::json!({
        "data": { "synthetic": spec },
        "train": train,
    }))
    .unwrap()
}

/// SHA-256 of every `.jsonl` file below `dir`, keyed by relative path.
pub fn jsonl_hashes(dir: &Path) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else if path.extension().is_some_and(|e| e == "jsonl") {
                let bytes = std::fs::read(&path).unwrap();
                let rel = path.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.insert(rel, hex::encode(Sha256::digest(&bytes)));
            }
        }
    }
    out
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
