//! Schedulers that decide which train examples each batch may draw from.
//!
//! Every scheduler implements [`Sampler`](crate::trainer::Sampler) and falls
//! back to plain shuffled epochs once its curriculum phase is over.

mod annealing;
mod competence;
mod random;

pub use annealing::{build_annealing_plan, AnnealingPlan, AnnealingSampler};
pub use competence::{build_competence_plan, CompetencePlan, CompetenceSampler};
pub use random::{EpochCycler, RandomSampler};

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::Corpus;

/// Added to every variability weight so all-zero variability still samples.
pub const WEIGHT_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Curriculum,
    PostCurriculum,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompetenceForm {
    #[default]
    Sqrt,
    Linear,
}

/// Fraction of the easiest-first ordering available at step `t`.
///
/// Square-root form: `min(1, sqrt(t (1 - c0^2) / T + c0^2))`. Linear form:
/// `min(1, t (1 - c0) / T + c0)`. Both start at `c0` and reach 1 at `T`.
pub fn competence_with(form: CompetenceForm, t: usize, c0: f64, duration: usize) -> f64 {
    if t == 0 {
        return c0;
    }
    if t >= duration {
        return 1.0;
    }
    let frac = t as f64 / duration as f64;
    let c = match form {
        CompetenceForm::Sqrt => (frac * (1.0 - c0 * c0) + c0 * c0).sqrt(),
        CompetenceForm::Linear => frac * (1.0 - c0) + c0,
    };
    c.min(1.0)
}

/// Square-root competence.
pub fn competence(t: usize, c0: f64, duration: usize) -> f64 {
    competence_with(CompetenceForm::Sqrt, t, c0, duration)
}

/// `ceil(c * n)`, at least 1 and at most `n`.
pub fn available_count(c: f64, n: usize) -> usize {
    // the tolerance absorbs products like 0.07 * 100 = 7.000000000000001
    ((c * n as f64 - 1e-9).ceil() as usize).clamp(1, n)
}

/// Random permutation where each draw (without replacement) picks an item
/// with probability proportional to its weight. Uses exponential keys
/// `ln(u) / w`, sorted descending.
pub fn weighted_permutation(items: &[usize], weight: impl Fn(usize) -> f64, rng: &mut impl Rng) -> Vec<usize> {
    let mut keyed: Vec<(f64, usize)> = items
        .iter()
        .map(|&i| {
            let u: f64 = 1.0 - rng.random::<f64>();
            (u.ln() / weight(i), i)
        })
        .collect();
    keyed.sort_by(|a, b| b.0.total_cmp(&a.0));
    keyed.into_iter().map(|(_, i)| i).collect()
}

/// Audit record of a curriculum plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanSummary {
    pub kind: String,
    pub num_examples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bucket_sizes: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bucket_scores: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub carryover_divisor: Option<usize>,
    /// SHA-256 of the example ids in plan order, one per line.
    pub ordering_digest: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duration: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub form: Option<CompetenceForm>,
    pub variability_weighted: bool,
}

pub(crate) fn ordering_digest(corpus: &Corpus, order: impl IntoIterator<Item = usize>) -> String {
    let mut h = Sha256::new();
    for i in order {
        h.update(corpus.examples()[i].id.as_bytes());
        h.update(b"\n");
    }
    hex::encode(h.finalize())
}
