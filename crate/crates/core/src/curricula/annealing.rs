use std::collections::BTreeMap;

use rand::seq::{index, SliceRandom};

use super::{ordering_digest, weighted_permutation, EpochCycler, Phase, PlanSummary, WEIGHT_EPSILON};
use crate::corpus::Corpus;
use crate::difficulty::DifficultyScores;
use crate::error::{Error, Result};
use crate::seed::{self, Rng};
use crate::trainer::Sampler;

/// Buckets of equal integer score, easiest first. When a stage starts it
/// carries over `floor(|d_j| / carryover_divisor)` random examples from each
/// earlier bucket `d_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnealingPlan {
    /// Train-corpus indices per bucket.
    pub buckets: Vec<Vec<usize>>,
    pub bucket_scores: Vec<f64>,
    /// `E + 1` for correctness over `E` epochs, `N` for Cross-Review with `N` teachers.
    pub carryover_divisor: usize,
    /// Per-example sampling weight (variability + epsilon) when weighted.
    pub weights: Option<Vec<f64>>,
    digest: String,
}

impl AnnealingPlan {
    pub fn num_buckets(&self) -> usize {
        self.buckets.len()
    }

    pub fn num_examples(&self) -> usize {
        self.buckets.iter().map(Vec::len).sum()
    }

    /// Size of each stage's pool: `|d_k| + sum_{j<k} floor(|d_j| / divisor)`.
    pub fn stage_pool_sizes(&self) -> Vec<usize> {
        let mut carried = 0;
        self.buckets
            .iter()
            .map(|b| {
                let size = b.len() + carried;
                carried += b.len() / self.carryover_divisor;
                size
            })
            .collect()
    }

    pub fn summary(&self) -> PlanSummary {
        PlanSummary {
            kind: "annealing".into(),
            num_examples: self.num_examples(),
            bucket_sizes: Some(self.buckets.iter().map(Vec::len).collect()),
            bucket_scores: Some(self.bucket_scores.clone()),
            carryover_divisor: Some(self.carryover_divisor),
            ordering_digest: self.digest.clone(),
            c0: None,
            duration: None,
            form: None,
            variability_weighted: self.weights.is_some(),
        }
    }
}

/// Group examples by integer score into buckets sorted easiest-first.
///
/// `max_score` is the largest attainable score (`E` for correctness, `N - 1`
/// for Cross-Review); the carryover divisor is `max_score + 1`. Passing
/// `variability` switches sampling within stages to variability-weighted.
pub fn build_annealing_plan(
    corpus: &Corpus,
    scores: &DifficultyScores,
    max_score: usize,
    variability: Option<&DifficultyScores>,
) -> Result<AnnealingPlan> {
    if !scores.is_integer_valued() {
        return Err(Error::Incompatible(format!(
            "annealing needs integer scores but {:?} is continuous; use a competence scheduler",
            scores.metric_name
        )));
    }
    if !scores.higher_is_easier {
        return Err(Error::Incompatible(format!(
            "annealing expects higher-is-easier scores, {:?} is the opposite",
            scores.metric_name
        )));
    }
    let values = scores.aligned(corpus)?;
    let mut groups: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (i, &v) in values.iter().enumerate() {
        if v < 0.0 || v > max_score as f64 {
            return Err(Error::Incompatible(format!(
                "score {v} of {:?} outside 0..={max_score}",
                corpus.examples()[i].id
            )));
        }
        groups.entry(v as i64).or_default().push(i);
    }
    let (bucket_scores, buckets): (Vec<f64>, Vec<Vec<usize>>) =
        groups.into_iter().rev().map(|(s, b)| (s as f64, b)).unzip();
    let weights = variability
        .map(|v| v.aligned(corpus).map(|a| a.into_iter().map(|x| x + WEIGHT_EPSILON).collect::<Vec<_>>()))
        .transpose()?;
    let digest = ordering_digest(corpus, buckets.iter().flatten().copied());
    Ok(AnnealingPlan {
        buckets,
        bucket_scores,
        carryover_divisor: max_score + 1,
        weights,
        digest,
    })
}

/// One stage per bucket, each lasting `ceil(|pool| / batch_size)` batches
/// and serving every pool member exactly once; afterwards shuffled epochs
/// over the full train set.
#[derive(Debug, Clone)]
pub struct AnnealingSampler {
    stages: Vec<Vec<usize>>,
    batch_size: usize,
    stage: usize,
    cursor: usize,
    post: EpochCycler,
    phase: Phase,
}

impl AnnealingSampler {
    pub fn new(plan: &AnnealingPlan, batch_size: usize, seed: u64) -> Result<Self> {
        if batch_size == 0 {
            return Err(Error::config("train.batch_size", "must be positive"));
        }
        let sizes = plan.stage_pool_sizes();
        if let Some((k, &s)) = sizes.iter().enumerate().find(|&(_, &s)| s < batch_size) {
            return Err(Error::config(
                "train.batch_size",
                format!("annealing stage {} has only {s} examples, fewer than batch size {batch_size}", k + 1),
            ));
        }
        let mut rng: Rng = seed::rng(seed::derive(seed, "annealing"));
        let mut stages = Vec::with_capacity(plan.buckets.len());
        for (k, bucket) in plan.buckets.iter().enumerate() {
            let mut pool = bucket.clone();
            for prev in &plan.buckets[..k] {
                let take = prev.len() / plan.carryover_divisor;
                pool.extend(index::sample(&mut rng, prev.len(), take).into_iter().map(|j| prev[j]));
            }
            let order = match &plan.weights {
                Some(w) => weighted_permutation(&pool, |i| w[i], &mut rng),
                None => {
                    pool.shuffle(&mut rng);
                    pool
                }
            };
            stages.push(order);
        }
        let n = plan.num_examples();
        let post = EpochCycler::new((0..n).collect(), batch_size, seed::rng(seed::derive(seed, "post")));
        Ok(AnnealingSampler {
            stages,
            batch_size,
            stage: 0,
            cursor: 0,
            post,
            phase: Phase::Curriculum,
        })
    }

    /// Serving order of each stage's pool.
    pub fn stages(&self) -> &[Vec<usize>] {
        &self.stages
    }

    /// Batches spent in the curriculum phase.
    pub fn curriculum_steps(&self) -> usize {
        self.stages.iter().map(|s| s.len().div_ceil(self.batch_size)).sum()
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    /// Stage (0-based) that the next batch comes from, `None` after the curriculum.
    pub fn current_stage(&self) -> Option<usize> {
        (self.phase == Phase::Curriculum).then_some(self.stage)
    }
}

impl Sampler for AnnealingSampler {
    fn next_batch(&mut self, _step: usize) -> Option<Vec<usize>> {
        if self.phase == Phase::PostCurriculum {
            return Some(self.post.next_batch());
        }
        let order = &self.stages[self.stage];
        let end = (self.cursor + self.batch_size).min(order.len());
        let batch = order[self.cursor..end].to_vec();
        self.cursor = end;
        if self.cursor == order.len() {
            self.stage += 1;
            self.cursor = 0;
            if self.stage == self.stages.len() {
                self.phase = Phase::PostCurriculum;
            }
        }
        Some(batch)
    }

    fn epoch_length(&self) -> usize {
        self.post.epoch_length()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Example, LabelMap, Split};
    use indexmap::IndexMap;

    fn corpus(n: usize) -> Corpus {
        let ex = (0..n).map(|i| Example::from_text(format!("e{i:04}"), "x", None, 0, 16)).collect();
        Corpus::new(Split::Train, ex, LabelMap::from_labels(["l"]), 16, false).unwrap()
    }

    fn scores(c: &Corpus, f: impl Fn(usize) -> f64) -> DifficultyScores {
        let m: IndexMap<String, f64> = c.ids().enumerate().map(|(i, id)| (id.to_string(), f(i))).collect();
        DifficultyScores::new("correctness", m, true).unwrap()
    }

    #[test]
    fn buckets_sorted_easiest_first() {
        let c = corpus(14);
        // 10 ids at 5, 3 at 2, 1 at 0
        let s = scores(&c, |i| if i < 10 { 5.0 } else if i < 13 { 2.0 } else { 0.0 });
        let plan = build_annealing_plan(&c, &s, 10, None).unwrap();
        assert_eq!(plan.buckets.iter().map(Vec::len).collect::<Vec<_>>(), [10, 3, 1]);
        assert_eq!(plan.bucket_scores, [5.0, 2.0, 0.0]);
    }

    #[test]
    fn every_score_value_gives_a_bucket() {
        let c = corpus(110);
        let s = scores(&c, |i| (i % 11) as f64);
        let plan = build_annealing_plan(&c, &s, 10, None).unwrap();
        assert_eq!(plan.num_buckets(), 11);
        let one = build_annealing_plan(&c, &scores(&c, |_| 3.0), 10, None).unwrap();
        assert_eq!(one.num_buckets(), 1);
    }

    #[test]
    fn continuous_scores_rejected() {
        let c = corpus(4);
        let s = scores(&c, |i| i as f64 * 0.5);
        let err = build_annealing_plan(&c, &s, 10, None).unwrap_err();
        assert!(err.to_string().contains("competence"));
    }

    #[test]
    fn carryover_from_first_bucket() {
        let c = corpus(150);
        // E = 9: |d_1| = 100, |d_2| = 50
        let s = scores(&c, |i| if i < 100 { 9.0 } else { 4.0 });
        let plan = build_annealing_plan(&c, &s, 9, None).unwrap();
        assert_eq!(plan.stage_pool_sizes(), [100, 60]);
        let sampler = AnnealingSampler::new(&plan, 10, 1).unwrap();
        let carried = sampler.stages()[1].iter().filter(|&&i| i < 100).count();
        assert_eq!(carried, 10);
    }

    #[test]
    fn single_bucket_is_one_random_epoch() {
        let c = corpus(25);
        let plan = build_annealing_plan(&c, &scores(&c, |_| 1.0), 3, None).unwrap();
        let mut s = AnnealingSampler::new(&plan, 10, 2).unwrap();
        assert_eq!(s.curriculum_steps(), 3);
        let mut served: Vec<usize> = (0..3).flat_map(|t| s.next_batch(t).unwrap()).collect();
        assert_eq!(s.phase(), Phase::PostCurriculum);
        served.sort();
        assert_eq!(served, (0..25).collect::<Vec<_>>());
    }

    #[test]
    fn small_pool_rejected() {
        let c = corpus(12);
        let s = scores(&c, |i| if i < 10 { 2.0 } else { 1.0 });
        let plan = build_annealing_plan(&c, &s, 2, None).unwrap();
        assert!(AnnealingSampler::new(&plan, 11, 0).is_err());
        assert!(AnnealingSampler::new(&plan, 5, 0).is_ok());
    }
}
