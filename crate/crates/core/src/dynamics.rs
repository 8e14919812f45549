//! Training-dynamics statistics: confidence, correctness and variability of
//! each train example across the teacher's epochs.

use std::collections::HashSet;
use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io;
use crate::trainer::EpochProbe;

/// Per-epoch gold probabilities and correctness flags of one example.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsTrace {
    pub example_id: String,
    pub probs: Vec<f64>,
    pub corrects: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TdStats {
    pub example_id: String,
    pub confidence: f64,
    pub correctness: usize,
    pub variability: f64,
}

/// Mean gold-label probability.
pub fn confidence(probs: &[f64]) -> Result<f64> {
    if probs.is_empty() {
        return Err(Error::Empty("trace"));
    }
    Ok(probs.iter().sum::<f64>() / probs.len() as f64)
}

/// Number of epochs in which the example was classified correctly.
pub fn correctness(corrects: &[bool]) -> Result<usize> {
    if corrects.is_empty() {
        return Err(Error::Empty("trace"));
    }
    Ok(corrects.iter().filter(|&&c| c).count())
}

/// Population standard deviation of the gold-label probabilities.
/// Equal probabilities give exactly zero.
pub fn variability(probs: &[f64]) -> Result<f64> {
    let first = *probs.first().ok_or(Error::Empty("trace"))?;
    let mean = first + probs.iter().map(|p| p - first).sum::<f64>() / probs.len() as f64;
    let ss: f64 = probs.iter().map(|p| (p - mean) * (p - mean)).sum();
    Ok((ss / probs.len() as f64).sqrt())
}

impl DynamicsTrace {
    pub fn stats(&self) -> Result<TdStats> {
        if self.probs.len() != self.corrects.len() {
            return Err(Error::Shape(format!(
                "trace {:?} has {} probabilities and {} flags",
                self.example_id,
                self.probs.len(),
                self.corrects.len()
            )));
        }
        Ok(TdStats {
            example_id: self.example_id.clone(),
            confidence: confidence(&self.probs)?,
            correctness: correctness(&self.corrects)?,
            variability: variability(&self.probs)?,
        })
    }
}

/// Transpose epoch probes into per-example traces, in first-epoch order.
/// Every epoch must cover exactly the same ids.
pub fn traces(probes: &[EpochProbe]) -> Result<Vec<DynamicsTrace>> {
    let first = probes.first().ok_or(Error::Empty("probe list"))?;
    let mut index: IndexMap<&str, DynamicsTrace> = IndexMap::with_capacity(first.entries.len());
    for e in &first.entries {
        let t = DynamicsTrace {
            example_id: e.example_id.clone(),
            probs: Vec::with_capacity(probes.len()),
            corrects: Vec::with_capacity(probes.len()),
        };
        if index.insert(&e.example_id, t).is_some() {
            return Err(Error::DuplicateId(e.example_id.clone()));
        }
    }
    for probe in probes {
        let mut seen = HashSet::with_capacity(index.len());
        for e in &probe.entries {
            let trace = index.get_mut(e.example_id.as_str()).ok_or_else(|| Error::ProbeMismatch {
                epoch: probe.epoch,
                id: e.example_id.clone(),
                what: "is absent from the first epoch",
            })?;
            if !seen.insert(e.example_id.as_str()) {
                return Err(Error::ProbeMismatch {
                    epoch: probe.epoch,
                    id: e.example_id.clone(),
                    what: "appears twice",
                });
            }
            trace.probs.push(e.gold_prob);
            trace.corrects.push(e.correct);
        }
        if seen.len() != index.len() {
            let missing = index.keys().find(|id| !seen.contains(*id)).expect("some id unseen");
            return Err(Error::ProbeMismatch {
                epoch: probe.epoch,
                id: missing.to_string(),
                what: "is missing",
            });
        }
    }
    Ok(index.into_values().collect())
}

/// Confidence, correctness and variability of every probed example. The
/// number of epochs is the number of probes.
pub fn compute_all(probes: &[EpochProbe]) -> Result<IndexMap<String, TdStats>> {
    traces(probes)?
        .iter()
        .map(|t| Ok((t.example_id.clone(), t.stats()?)))
        .collect()
}

pub fn write_td_stats(path: &Path, stats: &IndexMap<String, TdStats>) -> Result<()> {
    io::write_jsonl(path, stats.values())
}

pub fn read_td_stats(path: &Path) -> Result<IndexMap<String, TdStats>> {
    let rows: Vec<TdStats> = io::read_jsonl(path)?;
    let mut out = IndexMap::with_capacity(rows.len());
    for r in rows {
        let id = r.example_id.clone();
        if out.insert(id.clone(), r).is_some() {
            return Err(Error::DuplicateId(id));
        }
    }
    Ok(out)
}
