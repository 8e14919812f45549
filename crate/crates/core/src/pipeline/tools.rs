use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{DataConfig, FileData};
use super::layout;
use crate::analysis::{datamap_export, CorrelationMatrix};
use crate::corpus::{self, SynthSpec};
use crate::difficulty::DifficultyScores;
use crate::dynamics;
use crate::error::{Error, Result};
use crate::io;

/// Write a synthetic corpus as JSONL splits plus a label map and a
/// `data.json` that can be pasted into an experiment config.
pub fn cmd_synth(spec: &SynthSpec, out: &Path) -> Result<DataConfig> {
    spec.validate()?;
    io::create_dir(out)?;
    let out = std::fs::canonicalize(out).map_err(|e| Error::io(out, e))?;
    let splits = corpus::generate_synthetic(spec)?;
    let path = |name: &str| out.join(format!("{name}.jsonl"));
    for c in [&splits.train, &splits.validation, &splits.test_id, &splits.test_ood] {
        corpus::write_jsonl(c, &path(c.split().as_str()))?;
    }
    let label_map = out.join(layout::LABEL_MAP);
    corpus::write_label_map(splits.train.labels(), &label_map)?;
    let data = DataConfig::Files(FileData {
        train: Some(path("train")),
        validation: Some(path("validation")),
        test_id: Some(path("test_id")),
        test_ood: Some(path("test_ood")),
        test_transfer: None,
        label_map: Some(label_map),
        hash_dim: spec.feature_dim,
    });
    io::write_json(&out.join(layout::DATA_JSON), &data)?;
    io::write_json(&out.join(layout::SYNTH_SPEC), spec)?;
    Ok(data)
}

/// Data map of a teacher's statistics: `datamap.csv` and `datamap.svg`.
pub fn cmd_datamap(td_stats: &Path, out: &Path) -> Result<(PathBuf, PathBuf)> {
    let stats = dynamics::read_td_stats(td_stats)?;
    datamap_export(&stats, out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub sources: Vec<PathBuf>,
    pub matrix: CorrelationMatrix,
}

impl CorrelationReport {
    pub fn table(&self) -> String {
        let m = &self.matrix;
        let width = m.metrics.iter().map(String::len).max().unwrap_or(0).max(6);
        let mut out = format!("{:<width$}", "");
        for name in &m.metrics {
            write!(out, " {name:>width$}").unwrap();
        }
        out.push('\n');
        for (name, row) in m.metrics.iter().zip(&m.rho) {
            write!(out, "{name:<width$}").unwrap();
            for r in row {
                write!(out, " {r:>width$.3}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// Pairwise Spearman correlations between score files, written as
/// `correlation.json` and `correlation.txt`.
pub fn cmd_correlate(score_files: &[PathBuf], out: &Path) -> Result<CorrelationReport> {
    if score_files.len() < 2 {
        return Err(Error::config("scores", "at least two score files are required"));
    }
    let sets = score_files
        .iter()
        .map(|p| DifficultyScores::read(p))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&DifficultyScores> = sets.iter().collect();
    let report = CorrelationReport {
        sources: score_files.to_vec(),
        matrix: CorrelationMatrix::from_scores(&refs)?,
    };
    io::create_dir(out)?;
    io::write_json(&out.join(layout::CORRELATION_JSON), &report)?;
    io::write_text(&out.join(layout::CORRELATION_TXT), &report.table())?;
    Ok(report)
}
