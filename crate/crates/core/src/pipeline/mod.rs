//! Orchestration of the teacher/student pipeline over run directories.
//!
//! Every command writes only below its `out` directory and starts by
//! snapshotting the resolved config as `config.json`.
//!
//! Teacher directory:
//!
//! ```text
//! config.json  teacher_log.jsonl  probes.jsonl  td_stats.jsonl  folds.json
//! scores/{confidence,correctness,variability,cross_review,length,rarity,ppl}.jsonl
//! ```
//!
//! Student directory:
//!
//! ```text
//! config.json  plan.json  metrics.json  curve.csv  curve.svg
//! seed-<s>/run_log.jsonl  seed-<s>/metrics.json  seed-<s>/predictions/<split>.jsonl
//! ```

mod compare;
mod config;
mod student;
mod sweep;
mod teacher;
mod tools;

pub use compare::{cmd_compare, write_compare, CompareReport, SplitComparison};
pub use config::{
    CrossReviewSettings, CurriculumConfig, DataConfig, ExperimentConfig, FileData, NgramConfig, SchedulerKind,
    Splits, TeacherConfig,
};
pub use student::{
    baseline_best_step, cmd_student, competence_duration, Prediction, ScoreInputs, SeedMetrics, SplitAccuracy,
    StudentSummary,
};
pub use sweep::{cmd_sweep, student_dir, SweepReport, SweepRow};
pub use teacher::{cmd_teacher, TeacherMetric, TeacherOutcome};
pub use tools::{cmd_correlate, cmd_datamap, cmd_synth, CorrelationReport};

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::io;

/// File and directory names inside run directories.
pub mod layout {
    pub const CONFIG: &str = "config.json";
    pub const TEACHER_LOG: &str = "teacher_log.jsonl";
    pub const PROBES: &str = "probes.jsonl";
    pub const TD_STATS: &str = "td_stats.jsonl";
    pub const FOLDS: &str = "folds.json";
    pub const SCORES_DIR: &str = "scores";
    pub const PLAN: &str = "plan.json";
    pub const METRICS: &str = "metrics.json";
    pub const RUN_LOG: &str = "run_log.jsonl";
    pub const PREDICTIONS_DIR: &str = "predictions";
    pub const CURVE_CSV: &str = "curve.csv";
    pub const CURVE_SVG: &str = "curve.svg";
    pub const COMPARE_JSON: &str = "compare.json";
    pub const COMPARE_TXT: &str = "compare.txt";
    pub const TEACHER_DIR: &str = "teacher";
    pub const STUDENTS_DIR: &str = "students";
    pub const CURVES_SVG: &str = "curves.svg";
    pub const SWEEP_JSON: &str = "sweep.json";
    pub const SWEEP_TXT: &str = "sweep.txt";
    pub const LABEL_MAP: &str = "label_map.json";
    pub const DATA_JSON: &str = "data.json";
    pub const SYNTH_SPEC: &str = "synth.json";
    pub const CORRELATION_JSON: &str = "correlation.json";
    pub const CORRELATION_TXT: &str = "correlation.txt";
}

pub fn seed_dir(run: &Path, seed: u64) -> PathBuf {
    run.join(format!("seed-{seed}"))
}

fn snapshot_text(config: &ExperimentConfig) -> Result<String> {
    Ok(serde_json::to_string_pretty(config)? + "\n")
}

pub(crate) fn snapshot_config(config: &ExperimentConfig, dir: &Path) -> Result<()> {
    io::write_text(&dir.join(layout::CONFIG), &snapshot_text(config)?)
}

/// True when `dir` holds a config snapshot identical to `config`.
pub(crate) fn snapshot_matches(config: &ExperimentConfig, dir: &Path) -> Result<bool> {
    let path = dir.join(layout::CONFIG);
    match std::fs::read_to_string(&path) {
        Ok(text) => Ok(text == snapshot_text(config)?),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(false),
        Err(e) => Err(Error::io(path, e)),
    }
}

/// Run `f` on a rayon pool with `workers` threads.
pub(crate) fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::config("workers", e.to_string()))?;
    pool.install(f)
}
