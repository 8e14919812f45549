use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::compare::{cmd_compare, pct, CompareReport};
use super::config::{ExperimentConfig, SchedulerKind};
use super::student::{cmd_student, ScoreInputs, SplitAccuracy, StudentSummary};
use super::teacher::{cmd_teacher, TeacherMetric};
use super::{layout, seed_dir, snapshot_matches};
use crate::analysis::{curves_svg, learning_curve, CurvePoint};
use crate::error::{Error, Result};
use crate::io;
use crate::trainer::{RunLog, ACCURACY, VALIDATION};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub scheduler: SchedulerKind,
    pub run_dir: PathBuf,
    pub total_steps: usize,
    pub best_validation: SplitAccuracy,
    pub accuracy: IndexMap<String, SplitAccuracy>,
    pub vs_random: Option<CompareReport>,
    pub vs_cr_anneal: Option<CompareReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    /// Teacher and scoring runs executed by this call.
    pub teacher_runs: usize,
    /// Student trainings (scheduler × seed) executed by this call.
    pub student_runs: usize,
    /// Student trainings skipped because a finished run was found.
    pub skipped_student_runs: usize,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    /// One line per (scheduler, split) in scheduler-list order.
    pub fn table(&self) -> String {
        let mut out = format!(
            "{:<16} {:<14} {:>14} {:>8} {:>10} {:>8} {:>10}\n",
            "scheduler", "split", "acc", "p_rand", "ratio_rand", "p_cr", "ratio_cr"
        );
        let num = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"));
        for row in &self.rows {
            for (split, acc) in &row.accuracy {
                let p = |r: &Option<CompareReport>| r.as_ref().and_then(|r| r.split(split)).map(|s| s.p);
                let ratio = |r: &Option<CompareReport>| r.as_ref().map(|r| r.time_ratio.mean);
                writeln!(
                    out,
                    "{:<16} {:<14} {:>14} {:>8} {:>10} {:>8} {:>10}",
                    row.scheduler.name(),
                    split,
                    pct(acc),
                    num(p(&row.vs_random)),
                    num(ratio(&row.vs_random)),
                    num(p(&row.vs_cr_anneal)),
                    num(ratio(&row.vs_cr_anneal)),
                )
                .unwrap();
            }
        }
        out
    }
}

/// Directory of one scheduler's students inside a sweep.
pub fn student_dir(out: &Path, kind: SchedulerKind) -> PathBuf {
    out.join(layout::STUDENTS_DIR).join(kind.name())
}

/// Run the teacher once, every listed scheduler for every seed, and compare
/// each against `random` and `cr_anneal` when those are in the list.
///
/// Finished runs whose config snapshot matches are reused. The random
/// baseline runs first so that competence schedulers without an explicit
/// duration can take it from the baseline's best step.
pub fn cmd_sweep(config: &ExperimentConfig, schedulers: &[SchedulerKind], out: &Path) -> Result<SweepReport> {
    config.validate()?;
    if schedulers.is_empty() {
        return Err(Error::config("schedulers", "list is empty"));
    }
    for (i, k) in schedulers.iter().enumerate() {
        if schedulers[..i].contains(k) {
            return Err(Error::config("schedulers", format!("{k} is listed twice")));
        }
    }
    io::create_dir(out)?;
    let teacher_dir = out.join(layout::TEACHER_DIR);
    let mut report = SweepReport {
        teacher_runs: 0,
        student_runs: 0,
        skipped_student_runs: 0,
        rows: Vec::new(),
    };

    let mut needed = vec![TeacherMetric::Dynamics];
    for k in schedulers {
        if let Some(m) = k.metric().and_then(TeacherMetric::for_metric) {
            if !needed.contains(&m) {
                needed.push(m);
            }
        }
    }
    let fresh_teacher = snapshot_matches(&config.teacher_view(), &teacher_dir)?;
    for m in needed {
        let done = fresh_teacher && teacher_artifact(&teacher_dir, m).exists();
        if !done {
            cmd_teacher(config, m, &teacher_dir)?;
            report.teacher_runs += 1;
        }
    }

    let mut order: Vec<SchedulerKind> = schedulers.to_vec();
    order.sort_by_key(|k| *k != SchedulerKind::Random);
    let random_dir = schedulers
        .contains(&SchedulerKind::Random)
        .then(|| student_dir(out, SchedulerKind::Random));
    let mut summaries: IndexMap<SchedulerKind, StudentSummary> = IndexMap::new();
    for kind in order {
        let mut cfg = ExperimentConfig {
            scheduler: kind,
            ..config.clone()
        };
        let competence = kind.metric().is_some() && !kind.is_annealing();
        if competence && cfg.curriculum.duration.is_none() && cfg.curriculum.baseline.is_none() {
            cfg.curriculum.baseline = random_dir.clone();
        }
        let dir = student_dir(out, kind);
        let summary = if snapshot_matches(&cfg, &dir)? && dir.join(layout::METRICS).exists() {
            report.skipped_student_runs += cfg.seeds.len();
            StudentSummary::read(&dir)?
        } else {
            let inputs = ScoreInputs {
                scores: kind
                    .metric()
                    .map(|m| teacher_dir.join(layout::SCORES_DIR).join(format!("{m}.jsonl"))),
                weights: None,
            };
            let s = cmd_student(&cfg, &inputs, &dir)?;
            report.student_runs += cfg.seeds.len();
            s
        };
        summaries.insert(kind, summary);
    }

    let steps = summaries[0].total_steps;
    if let Some((k, s)) = summaries.iter().find(|(_, s)| s.total_steps != steps) {
        return Err(Error::Mismatch(format!(
            "budget parity violated: {k} took {} steps, expected {steps}",
            s.total_steps
        )));
    }

    let versus = |kind: SchedulerKind, reference: SchedulerKind| -> Result<Option<CompareReport>> {
        if !schedulers.contains(&reference) {
            return Ok(None);
        }
        cmd_compare(&student_dir(out, kind), &student_dir(out, reference), config.ar_rounds).map(Some)
    };
    let mut curves: Vec<(&str, Vec<CurvePoint>)> = Vec::new();
    for &kind in schedulers {
        let s = &summaries[&kind];
        let dir = student_dir(out, kind);
        let logs = s
            .seeds
            .iter()
            .map(|&seed| RunLog::read(&seed_dir(&dir, seed).join(layout::RUN_LOG)))
            .collect::<Result<Vec<_>>>()?;
        curves.push((kind.name(), learning_curve(&logs, ACCURACY, VALIDATION)?));
        report.rows.push(SweepRow {
            scheduler: kind,
            run_dir: dir,
            total_steps: s.total_steps,
            best_validation: s.best_validation.clone(),
            accuracy: s.accuracy.clone(),
            vs_random: versus(kind, SchedulerKind::Random)?,
            vs_cr_anneal: versus(kind, SchedulerKind::CrAnneal)?,
        });
    }
    let named: Vec<(&str, &[CurvePoint])> = curves.iter().map(|(n, c)| (*n, c.as_slice())).collect();
    io::write_text(&out.join(layout::CURVES_SVG), &curves_svg("validation accuracy", "accuracy", &named))?;
    io::write_json(&out.join(layout::SWEEP_JSON), &report)?;
    io::write_text(&out.join(layout::SWEEP_TXT), &report.table())?;
    Ok(report)
}

fn teacher_artifact(dir: &Path, metric: TeacherMetric) -> PathBuf {
    let scores = dir.join(layout::SCORES_DIR);
    match metric {
        // Variability is the last file the dynamics teacher writes.
        TeacherMetric::Dynamics => scores.join("variability.jsonl"),
        TeacherMetric::CrossReview => scores.join("cross_review.jsonl"),
        TeacherMetric::Length => scores.join("length.jsonl"),
        TeacherMetric::Rarity => scores.join("rarity.jsonl"),
        TeacherMetric::Perplexity => scores.join("ppl.jsonl"),
    }
}
