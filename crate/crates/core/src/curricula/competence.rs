use rand::Rng;

use super::{available_count, competence_with, ordering_digest, CompetenceForm, EpochCycler, Phase, PlanSummary, WEIGHT_EPSILON};
use crate::corpus::Corpus;
use crate::difficulty::DifficultyScores;
use crate::error::{Error, Result};
use crate::seed::{self, Rng as SeedRng};
use crate::trainer::Sampler;

/// Easiest-first ordering plus the pacing of the available prefix.
#[derive(Debug, Clone, PartialEq)]
pub struct CompetencePlan {
    /// Train-corpus indices, easiest first.
    pub ordering: Vec<usize>,
    pub c0: f64,
    /// Curriculum length `T` in optimizer steps.
    pub duration: usize,
    pub form: CompetenceForm,
    /// Sampling weight (variability + epsilon) per ordering position.
    pub weights: Option<Vec<f64>>,
    digest: String,
}

impl CompetencePlan {
    pub fn num_examples(&self) -> usize {
        self.ordering.len()
    }

    pub fn competence(&self, t: usize) -> f64 {
        competence_with(self.form, t, self.c0, self.duration)
    }

    /// Size of the available prefix at step `t`.
    pub fn available_len(&self, t: usize) -> usize {
        available_count(self.competence(t), self.ordering.len())
    }

    pub fn available(&self, t: usize) -> &[usize] {
        &self.ordering[..self.available_len(t)]
    }

    pub fn summary(&self) -> PlanSummary {
        PlanSummary {
            kind: "competence".into(),
            num_examples: self.num_examples(),
            bucket_sizes: None,
            bucket_scores: None,
            carryover_divisor: None,
            ordering_digest: self.digest.clone(),
            c0: Some(self.c0),
            duration: Some(self.duration),
            form: Some(self.form),
            variability_weighted: self.weights.is_some(),
        }
    }
}

/// Sort examples easiest-first by `scores`. Ties break by ascending
/// `tie_break` score when given (variability for confidence), then by id.
/// With `weighted`, `tie_break` also supplies the sampling weights.
pub fn build_competence_plan(
    corpus: &Corpus,
    scores: &DifficultyScores,
    tie_break: Option<&DifficultyScores>,
    weighted: bool,
    c0: f64,
    duration: usize,
    form: CompetenceForm,
) -> Result<CompetencePlan> {
    if !(c0 > 0.0 && c0 <= 1.0) {
        return Err(Error::config("curriculum.c0", "must lie in (0, 1]"));
    }
    if duration == 0 {
        return Err(Error::config("curriculum.duration", "must be positive"));
    }
    let values = scores.aligned(corpus)?;
    let secondary = tie_break.map(|s| s.aligned(corpus)).transpose()?;
    let examples = corpus.examples();
    let mut ordering: Vec<usize> = (0..corpus.len()).collect();
    ordering.sort_by(|&a, &b| {
        scores
            .easier_first(values[a], values[b])
            .then_with(|| match &secondary {
                Some(v) => v[a].total_cmp(&v[b]),
                None => std::cmp::Ordering::Equal,
            })
            .then_with(|| examples[a].id.cmp(&examples[b].id))
    });
    let weights = if weighted {
        let v = secondary
            .as_ref()
            .ok_or_else(|| Error::config("curriculum", "variability weighting needs variability scores"))?;
        Some(ordering.iter().map(|&i| v[i] + WEIGHT_EPSILON).collect())
    } else {
        None
    };
    let digest = ordering_digest(corpus, ordering.iter().copied());
    Ok(CompetencePlan {
        ordering,
        c0,
        duration,
        form,
        weights,
        digest,
    })
}

/// While `t <= T`, each batch is drawn with replacement from the available
/// prefix, uniformly or proportionally to the weights. After `T`, shuffled
/// epochs over the full train set.
#[derive(Debug, Clone)]
pub struct CompetenceSampler {
    plan: CompetencePlan,
    batch_size: usize,
    steps_per_epoch: usize,
    /// Running sums of the weights along the ordering.
    cumulative: Option<Vec<f64>>,
    rng: SeedRng,
    post: EpochCycler,
    phase: Phase,
}

impl CompetenceSampler {
    pub fn new(plan: CompetencePlan, batch_size: usize, steps_per_epoch: usize, seed: u64) -> Self {
        let cumulative = plan.weights.as_ref().map(|w| {
            w.iter()
                .scan(0.0, |acc, &x| {
                    *acc += x;
                    Some(*acc)
                })
                .collect()
        });
        let n = plan.num_examples();
        CompetenceSampler {
            post: EpochCycler::new((0..n).collect(), batch_size, seed::rng(seed::derive(seed, "post"))),
            rng: seed::rng(seed::derive(seed, "competence")),
            plan,
            batch_size,
            steps_per_epoch,
            cumulative,
            phase: Phase::Curriculum,
        }
    }

    pub fn plan(&self) -> &CompetencePlan {
        &self.plan
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    fn draw(&mut self, available: usize) -> usize {
        let pos = match &self.cumulative {
            None => self.rng.random_range(0..available),
            Some(cum) => {
                let u = self.rng.random::<f64>() * cum[available - 1];
                cum[..available].partition_point(|&c| c <= u).min(available - 1)
            }
        };
        self.plan.ordering[pos]
    }
}

impl Sampler for CompetenceSampler {
    fn next_batch(&mut self, step: usize) -> Option<Vec<usize>> {
        if step > self.plan.duration {
            self.phase = Phase::PostCurriculum;
        }
        if self.phase == Phase::PostCurriculum {
            return Some(self.post.next_batch());
        }
        let available = self.plan.available_len(step);
        Some((0..self.batch_size).map(|_| self.draw(available)).collect())
    }

    fn epoch_length(&self) -> usize {
        self.steps_per_epoch
    }
}
