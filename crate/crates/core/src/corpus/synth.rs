use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{Corpus, Example, LabelMap, SparseVec, Split, NOISY_SUFFIX};
use crate::error::{Error, Result};
use crate::seed;

/// Parameters of the synthetic Gaussian-cluster task. Missing JSON fields
/// take their [`Default`] values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSpec {
    pub num_classes: usize,
    pub train_size: usize,
    pub val_size: usize,
    pub test_size: usize,
    pub feature_dim: usize,
    pub class_separation: f64,
    pub label_noise_fraction: f64,
    pub ood_shift: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
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
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |f: &str, m: &str| Err(Error::config(format!("synthetic.{f}"), m));
        if self.num_classes < 2 {
            return bad("num_classes", "must be at least 2");
        }
        if self.train_size == 0 || self.val_size == 0 || self.test_size == 0 {
            return bad("train_size", "split sizes must be positive");
        }
        if self.feature_dim < self.num_classes {
            return bad("feature_dim", "must be at least num_classes");
        }
        if !(self.class_separation > 0.0 && self.class_separation.is_finite()) {
            return bad("class_separation", "must be positive");
        }
        if !(0.0..0.5).contains(&self.label_noise_fraction) {
            return bad("label_noise_fraction", "must lie in [0, 0.5)");
        }
        if !(self.ood_shift >= 0.0 && self.ood_shift.is_finite()) {
            return bad("ood_shift", "must be nonnegative");
        }
        Ok(())
    }

    /// Number of train examples whose label is flipped.
    pub fn noisy_count(&self) -> usize {
        (self.label_noise_fraction * self.train_size as f64).floor() as usize
    }

    pub fn label_map(&self) -> LabelMap {
        LabelMap::from_labels((0..self.num_classes).map(|c| format!("c{c}")))
    }
}

#[derive(Debug, Clone)]
pub struct SynthSplits {
    pub train: Corpus,
    pub validation: Corpus,
    pub test_id: Corpus,
    pub test_ood: Corpus,
}

const VOCAB: usize = 400;

/// Generate the four splits. Class means are the vertices of a regular
/// simplex with edge length `class_separation`, embedded along a random
/// orthonormal basis; points are mean plus standard normal noise, then
/// L2-normalized. The OOD split moves every mean by `ood_shift` along one
/// shared random direction.
///
/// Each example also gets a filler sentence drawn from a skewed vocabulary,
/// independent of its label, so text heuristics have something to measure.
pub fn generate_synthetic(spec: &SynthSpec) -> Result<SynthSplits> {
    spec.validate()?;
    let means = class_means(spec);
    let mut shift_rng = seed::rng(seed::derive(spec.seed, "ood-direction"));
    let shift = unit_vector(&mut shift_rng, spec.feature_dim);
    let ood_means: Vec<Vec<f64>> = means
        .iter()
        .map(|m| m.iter().zip(&shift).map(|(a, s)| a + spec.ood_shift * s).collect())
        .collect();

    let labels = spec.label_map();
    let build = |split: Split, n: usize, means: &[Vec<f64>], noisy: usize| -> Result<Corpus> {
        let mut rng = seed::rng(seed::derive(spec.seed, split.as_str()));
        let mut flip = vec![false; n];
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        for &i in &order[..noisy] {
            flip[i] = true;
        }
        let examples = (0..n)
            .map(|i| {
                let class = i % spec.num_classes;
                let point: Vec<(u32, f64)> = means[class]
                    .iter()
                    .enumerate()
                    .map(|(d, m)| (d as u32, m + rng.sample::<f64, _>(StandardNormal)))
                    .collect();
                let text = filler_sentence(&mut rng);
                let (label, id) = if flip[i] {
                    let wrong = rng.random_range(0..spec.num_classes - 1);
                    let label = if wrong >= class { wrong + 1 } else { wrong };
                    (label, format!("{split}-{i:06}{NOISY_SUFFIX}"))
                } else {
                    (class, format!("{split}-{i:06}"))
                };
                let features = SparseVec::from_pairs(point).normalized();
                Example::with_features(id, text, None, label, features)
            })
            .collect();
        Corpus::new(split, examples, labels.clone(), spec.feature_dim, true)
    };

    Ok(SynthSplits {
        train: build(Split::Train, spec.train_size, &means, spec.noisy_count())?,
        validation: build(Split::Validation, spec.val_size, &means, 0)?,
        test_id: build(Split::TestId, spec.test_size, &means, 0)?,
        test_ood: build(Split::TestOod, spec.test_size, &ood_means, 0)?,
    })
}

fn class_means(spec: &SynthSpec) -> Vec<Vec<f64>> {
    let c = spec.num_classes;
    let mut rng = seed::rng(seed::derive(spec.seed, "class-means"));
    let basis = orthonormal_basis(&mut rng, c, spec.feature_dim);
    let scale = spec.class_separation / std::f64::consts::SQRT_2;
    (0..c)
        .map(|class| {
            let mut mean = vec![0.0; spec.feature_dim];
            for (k, q) in basis.iter().enumerate() {
                let coord = scale * (if k == class { 1.0 } else { 0.0 } - 1.0 / c as f64);
                for (m, qd) in mean.iter_mut().zip(q) {
                    *m += coord * qd;
                }
            }
            mean
        })
        .collect()
}

fn unit_vector(rng: &mut impl Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-8 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Gram-Schmidt over Gaussian draws; redraws on (improbable) degeneracy.
fn orthonormal_basis(rng: &mut impl Rng, count: usize, dim: usize) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(count);
    while basis.len() < count {
        let mut v = unit_vector(rng, dim);
        for q in &basis {
            let dot: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
            for (x, qd) in v.iter_mut().zip(q) {
                *x -= dot * qd;
            }
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-6 {
            basis.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    basis
}

fn filler_sentence(rng: &mut impl Rng) -> String {
    let len = rng.random_range(3..=24);
    let words: Vec<String> = (0..len)
        .map(|_| {
            let u: f64 = rng.random();
            format!("w{}", (u * u * u * VOCAB as f64) as usize)
        })
        .collect();
    words.join(" ") + " ."
}
