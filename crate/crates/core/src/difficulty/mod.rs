//! Difficulty scores from training dynamics, Cross-Review teachers and
//! task-agnostic text heuristics, all in one [`DifficultyScores`] shape.

mod cross_review;
mod heuristics;
mod ngram;

pub use cross_review::{cross_review, partition, CrossReviewConfig, CrossReviewOutcome};
pub use heuristics::{length_metric, rarity_metric, Rarity};
pub use ngram::{perplexity_metric, NgramLm};

use std::cmp::Ordering;
use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::dynamics::TdStats;
use crate::error::{Error, Result};
use crate::io;

pub const CONFIDENCE: &str = "confidence";
pub const CORRECTNESS: &str = "correctness";
pub const VARIABILITY: &str = "variability";
pub const CROSS_REVIEW: &str = "cross_review";
pub const LENGTH: &str = "length";
pub const RARITY: &str = "rarity";
pub const PERPLEXITY: &str = "ppl";

/// A named score per example plus its orientation.
#[derive(Debug, Clone, PartialEq)]
pub struct DifficultyScores {
    pub metric_name: String,
    pub scores: IndexMap<String, f64>,
    pub higher_is_easier: bool,
}

#[derive(Serialize, Deserialize)]
struct Header {
    metric_name: String,
    higher_is_easier: bool,
}

#[derive(Serialize, Deserialize)]
struct Row {
    example_id: String,
    score: f64,
}

impl DifficultyScores {
    pub fn new(metric_name: impl Into<String>, scores: IndexMap<String, f64>, higher_is_easier: bool) -> Result<Self> {
        let metric_name = metric_name.into();
        if let Some((id, v)) = scores.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Undefined(format!("{metric_name} score of {id:?} is {v}")));
        }
        Ok(DifficultyScores {
            metric_name,
            scores,
            higher_is_easier,
        })
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<f64> {
        self.scores.get(id).copied()
    }

    /// True if every score is a whole number.
    pub fn is_integer_valued(&self) -> bool {
        self.scores.values().all(|v| v.fract() == 0.0)
    }

    /// Scores aligned with `corpus` order; every example must be scored.
    pub fn aligned(&self, corpus: &Corpus) -> Result<Vec<f64>> {
        corpus
            .ids()
            .map(|id| {
                self.get(id)
                    .ok_or_else(|| Error::MissingExample(id.to_string(), "difficulty scores"))
            })
            .collect()
    }

    /// Compare two scores so that easier sorts first.
    pub fn easier_first(&self, a: f64, b: f64) -> Ordering {
        if self.higher_is_easier {
            b.total_cmp(&a)
        } else {
            a.total_cmp(&b)
        }
    }

    /// Ids sorted easiest-first; equal scores fall back to id order.
    pub fn easiest_first(&self) -> Vec<&str> {
        let mut ids: Vec<(&str, f64)> = self.scores.iter().map(|(k, &v)| (k.as_str(), v)).collect();
        ids.sort_by(|a, b| self.easier_first(a.1, b.1).then_with(|| a.0.cmp(b.0)));
        ids.into_iter().map(|(id, _)| id).collect()
    }

    /// Header record `{metric_name, higher_is_easier}` then one
    /// `{example_id, score}` per line.
    pub fn write(&self, path: &Path) -> Result<()> {
        let header = serde_json::to_value(Header {
            metric_name: self.metric_name.clone(),
            higher_is_easier: self.higher_is_easier,
        })?;
        let rows = self.scores.iter().map(|(id, &score)| {
            serde_json::to_value(Row {
                example_id: id.clone(),
                score,
            })
            .expect("plain struct serializes")
        });
        io::write_jsonl(path, std::iter::once(header).chain(rows))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let lines: Vec<serde_json::Value> = io::read_jsonl(path)?;
        let mut it = lines.into_iter();
        let parse_err = |line: usize, msg: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            msg,
        };
        let header: Header = it
            .next()
            .ok_or_else(|| parse_err(1, "missing header record".into()))
            .and_then(|v| serde_json::from_value(v).map_err(|e| parse_err(1, format!("bad header: {e}"))))?;
        let mut scores = IndexMap::new();
        for (n, v) in it.enumerate() {
            let row: Row = serde_json::from_value(v).map_err(|e| parse_err(n + 2, e.to_string()))?;
            if scores.insert(row.example_id.clone(), row.score).is_some() {
                return Err(Error::DuplicateId(row.example_id));
            }
        }
        Self::new(header.metric_name, scores, header.higher_is_easier)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TdMetric {
    Confidence,
    Correctness,
    Variability,
}

impl TdMetric {
    pub fn name(self) -> &'static str {
        match self {
            TdMetric::Confidence => CONFIDENCE,
            TdMetric::Correctness => CORRECTNESS,
            TdMetric::Variability => VARIABILITY,
        }
    }
}

/// Scores for every example of `corpus` from its dynamics statistics.
/// Variability is oriented as higher = harder (more uncertain).
pub fn from_td(corpus: &Corpus, stats: &IndexMap<String, TdStats>, which: TdMetric) -> Result<DifficultyScores> {
    let scores = corpus
        .ids()
        .map(|id| {
            let s = stats
                .get(id)
                .ok_or_else(|| Error::MissingExample(id.to_string(), "training-dynamics statistics"))?;
            let v = match which {
                TdMetric::Confidence => s.confidence,
                TdMetric::Correctness => s.correctness as f64,
                TdMetric::Variability => s.variability,
            };
            Ok((id.to_string(), v))
        })
        .collect::<Result<_>>()?;
    DifficultyScores::new(which.name(), scores, which != TdMetric::Variability)
}
