use indexmap::IndexMap;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{DifficultyScores, CROSS_REVIEW};
use crate::corpus::Corpus;
use crate::curricula::RandomSampler;
use crate::error::{Error, Result};
use crate::seed;
use crate::trainer::{self, ProbeSink, TrainConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossReviewConfig {
    #[serde(default = "default_subsets")]
    pub num_subsets: usize,
    #[serde(default)]
    pub seed: u64,
    /// Teacher configuration for each fold.
    pub train: TrainConfig,
}

fn default_subsets() -> usize {
    10
}

#[derive(Debug, Clone)]
pub struct CrossReviewOutcome {
    pub scores: DifficultyScores,
    /// Train-corpus indices of each subset.
    pub folds: Vec<Vec<usize>>,
}

/// Seeded near-equal partition of `0..n` into `k` subsets; sizes differ by at
/// most one and the larger subsets come first.
pub fn partition(n: usize, k: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seed::rng(seed));
    let (base, rem) = (n / k, n % k);
    let mut out = Vec::with_capacity(k);
    let mut start = 0;
    for i in 0..k {
        let len = base + usize::from(i < rem);
        out.push(order[start..start + len].to_vec());
        start += len;
    }
    out
}

/// Train one teacher per subset and score each example by how many of the
/// teachers trained on *other* subsets classify it correctly (`0..=N-1`).
/// Fold teachers train in parallel.
pub fn cross_review(train: &Corpus, val: &Corpus, config: &CrossReviewConfig) -> Result<CrossReviewOutcome> {
    let k = config.num_subsets;
    if k < 2 {
        return Err(Error::config("cross_review.num_subsets", "must be at least 2"));
    }
    if k > train.len() {
        return Err(Error::config("cross_review.num_subsets", "exceeds the number of train examples"));
    }
    let folds = partition(train.len(), k, seed::derive(config.seed, "cross-review-partition"));
    let smallest = folds.iter().map(Vec::len).min().unwrap_or(0);
    if smallest < config.train.batch_size {
        return Err(Error::config(
            "cross_review.num_subsets",
            format!(
                "subsets of {smallest} examples are smaller than one batch of {}; use fewer subsets",
                config.train.batch_size
            ),
        ));
    }

    let teachers = folds
        .par_iter()
        .enumerate()
        .map(|(i, fold)| {
            let sub = train.subset(fold);
            let cfg = TrainConfig {
                seed: seed::derive(config.seed, &format!("cross-review-teacher-{i}")),
                ..config.train.clone()
            };
            let mut sampler = RandomSampler::new(sub.len(), cfg.batch_size, seed::derive(cfg.seed, "sampler"));
            let out = trainer::train(&sub, val, &cfg, &mut sampler, ProbeSink::Disabled)?;
            trainer::predict_correct(&out.params, train)
        })
        .collect::<Result<Vec<Vec<bool>>>>()?;

    let mut owner = vec![0; train.len()];
    for (i, fold) in folds.iter().enumerate() {
        for &j in fold {
            owner[j] = i;
        }
    }
    let scores: IndexMap<String, f64> = train
        .ids()
        .enumerate()
        .map(|(j, id)| {
            let votes = teachers
                .iter()
                .enumerate()
                .filter(|&(t, correct)| t != owner[j] && correct[j])
                .count();
            (id.to_string(), votes as f64)
        })
        .collect();
    Ok(CrossReviewOutcome {
        scores: DifficultyScores::new(CROSS_REVIEW, scores, true)?,
        folds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_sizes() {
        let p = partition(99, 3, 1);
        assert_eq!(p.iter().map(Vec::len).collect::<Vec<_>>(), [33, 33, 33]);
        let p = partition(10, 3, 1);
        assert_eq!(p.iter().map(Vec::len).collect::<Vec<_>>(), [4, 3, 3]);
        let mut all: Vec<usize> = p.into_iter().flatten().collect();
        all.sort();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
    }
}
