use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::io;

pub const VALIDATION: &str = "validation";
pub const ACCURACY: &str = "accuracy";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub step: usize,
    pub split: String,
    pub metric: String,
    pub value: f64,
}

/// Append-only record of a run. The best checkpoint is the earliest step
/// with the highest validation accuracy.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunLog {
    records: Vec<LogRecord>,
    best_step: usize,
    best_val_metric: f64,
    has_best: bool,
}

impl RunLog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Rebuild a log (and its best checkpoint) from raw records.
    pub fn from_records(records: Vec<LogRecord>) -> Self {
        let mut log = RunLog::new();
        for r in records {
            log.push(r.step, &r.split, &r.metric, r.value);
        }
        log
    }

    /// Append a record. Returns true when it is a new best validation accuracy.
    pub fn push(&mut self, step: usize, split: &str, metric: &str, value: f64) -> bool {
        debug_assert!(self.records.last().is_none_or(|r| r.step <= step));
        self.records.push(LogRecord {
            step,
            split: split.to_string(),
            metric: metric.to_string(),
            value,
        });
        let improved = split == VALIDATION
            && metric == ACCURACY
            && (!self.has_best || value > self.best_val_metric);
        if improved {
            self.best_step = step;
            self.best_val_metric = value;
            self.has_best = true;
        }
        improved
    }

    pub fn records(&self) -> &[LogRecord] {
        &self.records
    }

    /// `None` until a validation accuracy has been logged.
    pub fn best_step(&self) -> Option<usize> {
        self.has_best.then_some(self.best_step)
    }

    pub fn best_val_metric(&self) -> Option<f64> {
        self.has_best.then_some(self.best_val_metric)
    }

    /// `(step, value)` pairs for one split/metric.
    pub fn series(&self, split: &str, metric: &str) -> Vec<(usize, f64)> {
        self.records
            .iter()
            .filter(|r| r.split == split && r.metric == metric)
            .map(|r| (r.step, r.value))
            .collect()
    }

    pub fn last_step(&self) -> usize {
        self.records.last().map_or(0, |r| r.step)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        io::write_jsonl(path, &self.records)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(Self::from_records(io::read_jsonl(path)?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeEntry {
    pub example_id: String,
    pub gold_prob: f64,
    pub correct: bool,
}

/// Gold-label probability and correctness of every train example, measured
/// with the parameters at the end of epoch `epoch` (1-based).
#[derive(Debug, Clone, PartialEq)]
pub struct EpochProbe {
    pub epoch: usize,
    pub entries: Vec<ProbeEntry>,
}

#[derive(Serialize, Deserialize)]
struct ProbeLine {
    epoch: usize,
    example_id: String,
    gold_prob: f64,
    correct: bool,
}

pub fn write_probes(path: &Path, probes: &[EpochProbe]) -> Result<()> {
    let lines = probes.iter().flat_map(|p| {
        p.entries.iter().map(move |e| ProbeLine {
            epoch: p.epoch,
            example_id: e.example_id.clone(),
            gold_prob: e.gold_prob,
            correct: e.correct,
        })
    });
    io::write_jsonl(path, lines)
}

/// Read probes back, grouping consecutive lines by epoch.
pub fn read_probes(path: &Path) -> Result<Vec<EpochProbe>> {
    let lines: Vec<ProbeLine> = io::read_jsonl(path)?;
    let mut out: Vec<EpochProbe> = Vec::new();
    for l in lines {
        if out.last().is_none_or(|p| p.epoch != l.epoch) {
            out.push(EpochProbe {
                epoch: l.epoch,
                entries: Vec::new(),
            });
        }
        out.last_mut().unwrap().entries.push(ProbeEntry {
            example_id: l.example_id,
            gold_prob: l.gold_prob,
            correct: l.correct,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn best_is_earliest_maximum() {
        let mut log = RunLog::new();
        assert_eq!(log.best_step(), None);
        log.push(10, VALIDATION, ACCURACY, 0.5);
        log.push(10, "train", "loss", 0.9);
        log.push(20, VALIDATION, ACCURACY, 0.8);
        log.push(30, VALIDATION, ACCURACY, 0.8);
        log.push(40, VALIDATION, ACCURACY, 0.7);
        assert_eq!(log.best_step(), Some(20));
        assert_eq!(log.best_val_metric(), Some(0.8));
        assert_eq!(RunLog::from_records(log.records().to_vec()), log);
    }

    #[test]
    fn jsonl_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut log = RunLog::new();
        log.push(3, VALIDATION, ACCURACY, 0.1 + 0.2);
        log.push(6, "train", "loss", 1.0 / 3.0);
        let p = dir.path().join("log.jsonl");
        log.write(&p).unwrap();
        assert_eq!(RunLog::read(&p).unwrap(), log);

        let probes = vec![
            EpochProbe {
                epoch: 1,
                entries: vec![ProbeEntry { example_id: "a".into(), gold_prob: 0.25, correct: false }],
            },
            EpochProbe {
                epoch: 2,
                entries: vec![ProbeEntry { example_id: "a".into(), gold_prob: 0.75, correct: true }],
            },
        ];
        let p = dir.path().join("probes.jsonl");
        write_probes(&p, &probes).unwrap();
        assert_eq!(read_probes(&p).unwrap(), probes);
    }
}
