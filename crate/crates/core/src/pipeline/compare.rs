use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::student::{Prediction, SplitAccuracy, StudentSummary};
use super::{layout, seed_dir};
use crate::analysis::{approx_randomization, time_ratio_summary, TimeRatioSummary};
use crate::error::{Error, Result};
use crate::io;
use crate::seed;
use crate::trainer::RunLog;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitComparison {
    pub split: String,
    pub acc_a: SplitAccuracy,
    pub acc_b: SplitAccuracy,
    /// Approximate-randomization p-value over (example, seed) units.
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub run_a: PathBuf,
    pub run_b: PathBuf,
    pub scheduler_a: String,
    pub scheduler_b: String,
    pub seeds: Vec<u64>,
    pub rounds: usize,
    pub splits: Vec<SplitComparison>,
    /// Best step of `a` over best step of `b`, per seed.
    pub time_ratio: TimeRatioSummary,
}

impl CompareReport {
    /// Plain-text table with one row per split.
    pub fn table(&self) -> String {
        let mut out = format!(
            "{:<14} {:>14} {:>14} {:>8} {:>10} {:>10}\n",
            "split", "acc_a", "acc_b", "p", "ratio_mean", "ratio_min"
        );
        for s in &self.splits {
            writeln!(
                out,
                "{:<14} {:>14} {:>14} {:>8.4} {:>10.4} {:>10.4}",
                s.split,
                pct(&s.acc_a),
                pct(&s.acc_b),
                s.p,
                self.time_ratio.mean,
                self.time_ratio.min
            )
            .unwrap();
        }
        out
    }

    pub fn split(&self, name: &str) -> Option<&SplitComparison> {
        self.splits.iter().find(|s| s.split == name)
    }
}

pub(crate) fn pct(a: &SplitAccuracy) -> String {
    format!("{:.2}±{:.2}", 100.0 * a.mean, 100.0 * a.std)
}

/// Compare two student run directories split by split.
///
/// Both runs must cover the same seeds and evaluation splits. Per-example
/// predictions of all seeds are pooled into one paired sample for the
/// significance test. Nothing outside the two directories is read.
pub fn cmd_compare(run_a: &Path, run_b: &Path, rounds: usize) -> Result<CompareReport> {
    let a = StudentSummary::read(run_a)?;
    let b = StudentSummary::read(run_b)?;
    if a.seeds != b.seeds {
        return Err(Error::Mismatch(format!("seeds differ: {:?} vs {:?}", a.seeds, b.seeds)));
    }
    if a.splits() != b.splits() {
        return Err(Error::Mismatch(format!(
            "evaluation splits differ: {:?} vs {:?}",
            a.splits(),
            b.splits()
        )));
    }
    let mut splits = Vec::new();
    for name in a.splits() {
        let pa = pooled(run_a, &a.seeds, name)?;
        let pb = pooled(run_b, &b.seeds, name)?;
        if pa.len() != pb.len() {
            return Err(Error::Mismatch(format!("{name}: {} vs {} predictions", pa.len(), pb.len())));
        }
        if let Some((x, y)) = pa.iter().zip(&pb).find(|(x, y)| x.example_id != y.example_id) {
            return Err(Error::Mismatch(format!(
                "{name}: prediction order differs ({:?} vs {:?})",
                x.example_id, y.example_id
            )));
        }
        let ca: Vec<bool> = pa.iter().map(|p| p.correct).collect();
        let cb: Vec<bool> = pb.iter().map(|p| p.correct).collect();
        let p = approx_randomization(&ca, &cb, rounds, seed::derive(0, &format!("compare-{name}")))?;
        splits.push(SplitComparison {
            split: name.to_string(),
            acc_a: a.accuracy[name].clone(),
            acc_b: b.accuracy[name].clone(),
            p,
        });
    }
    let logs = |dir: &Path| -> Result<Vec<RunLog>> {
        a.seeds
            .iter()
            .map(|&s| RunLog::read(&seed_dir(dir, s).join(layout::RUN_LOG)))
            .collect()
    };
    let time_ratio = time_ratio_summary(&logs(run_a)?, &logs(run_b)?)?;
    Ok(CompareReport {
        run_a: run_a.to_path_buf(),
        run_b: run_b.to_path_buf(),
        scheduler_a: a.scheduler.name().to_string(),
        scheduler_b: b.scheduler.name().to_string(),
        seeds: a.seeds,
        rounds,
        splits,
        time_ratio,
    })
}

/// Write `compare.json` and `compare.txt` into `out`.
pub fn write_compare(report: &CompareReport, out: &Path) -> Result<()> {
    io::write_json(&out.join(layout::COMPARE_JSON), report)?;
    io::write_text(&out.join(layout::COMPARE_TXT), &report.table())
}

fn pooled(dir: &Path, seeds: &[u64], split: &str) -> Result<Vec<Prediction>> {
    let mut all = Vec::new();
    for &s in seeds {
        let path = seed_dir(dir, s).join(layout::PREDICTIONS_DIR).join(format!("{split}.jsonl"));
        all.extend(io::read_jsonl::<Prediction>(&path)?);
    }
    Ok(all)
}
