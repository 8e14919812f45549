use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, SchedulerKind, Splits};
use super::{layout, seed_dir, snapshot_config, with_workers};
use crate::analysis::{curve_csv, curves_svg, learning_curve, mean_std};
use crate::corpus::Corpus;
use crate::curricula::{
    build_annealing_plan, build_competence_plan, AnnealingSampler, CompetenceSampler, PlanSummary, RandomSampler,
};
use crate::difficulty::{self, DifficultyScores};
use crate::error::{Error, Result};
use crate::io;
use crate::seed;
use crate::trainer::{self, ProbeSink, RunLog, Sampler, TrainConfig, ACCURACY, VALIDATION};

/// Mean, population std and per-seed values of one accuracy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitAccuracy {
    pub mean: f64,
    pub std: f64,
    pub per_seed: Vec<f64>,
}

impl SplitAccuracy {
    pub fn from_values(per_seed: Vec<f64>) -> Self {
        let (mean, std) = mean_std(&per_seed);
        SplitAccuracy { mean, std, per_seed }
    }
}

/// `metrics.json` of a student run directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudentSummary {
    pub scheduler: SchedulerKind,
    #[serde(default)]
    pub metric: Option<String>,
    pub seeds: Vec<u64>,
    /// Optimizer steps per seed; identical for every scheduler.
    pub total_steps: usize,
    pub best_steps: Vec<usize>,
    pub best_validation: SplitAccuracy,
    /// Accuracy of the best checkpoint on each evaluation split.
    pub accuracy: IndexMap<String, SplitAccuracy>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl StudentSummary {
    pub fn read(dir: &Path) -> Result<Self> {
        io::read_json(&dir.join(layout::METRICS))
    }

    pub fn splits(&self) -> Vec<&str> {
        self.accuracy.keys().map(String::as_str).collect()
    }
}

/// Per-seed outcome, also written as `seed-<s>/metrics.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedMetrics {
    pub seed: u64,
    pub total_steps: usize,
    pub best_step: usize,
    pub best_validation: f64,
    pub accuracy: IndexMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub example_id: String,
    pub correct: bool,
}

/// Curriculum recipe shared by every seed. The plan itself is deterministic
/// given the scores; seeds only change the sampling.
#[derive(Debug, Clone)]
enum Recipe {
    Random,
    Annealing(crate::curricula::AnnealingPlan),
    Competence(crate::curricula::CompetencePlan),
}

impl Recipe {
    fn summary(&self) -> Option<PlanSummary> {
        match self {
            Recipe::Random => None,
            Recipe::Annealing(p) => Some(p.summary()),
            Recipe::Competence(p) => Some(p.summary()),
        }
    }

    fn sampler(&self, n: usize, cfg: &TrainConfig) -> Result<Box<dyn Sampler>> {
        let s = seed::derive(cfg.seed, "sampler");
        Ok(match self {
            Recipe::Random => Box::new(RandomSampler::new(n, cfg.batch_size, s)),
            Recipe::Annealing(p) => Box::new(AnnealingSampler::new(p, cfg.batch_size, s)?),
            Recipe::Competence(p) => {
                Box::new(CompetenceSampler::new(p.clone(), cfg.batch_size, cfg.steps_per_epoch(n), s))
            }
        })
    }
}

/// Where the scores and optional variability weights of a student come from.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScoreInputs {
    pub scores: Option<PathBuf>,
    /// Variability scores for weighting and tie-breaking; defaults to
    /// `variability.jsonl` next to the scores file.
    pub weights: Option<PathBuf>,
}

impl ScoreInputs {
    pub fn scores(path: impl Into<PathBuf>) -> Self {
        ScoreInputs {
            scores: Some(path.into()),
            weights: None,
        }
    }
}

/// Train one student per seed under `config.scheduler` and evaluate the best
/// checkpoint on every evaluation split.
pub fn cmd_student(config: &ExperimentConfig, inputs: &ScoreInputs, out: &Path) -> Result<StudentSummary> {
    config.validate()?;
    io::create_dir(out)?;
    snapshot_config(config, out)?;
    let splits = config.load_data()?;
    let mut warnings = Vec::new();
    let (recipe, metric) = build_recipe(config, inputs, &splits.train, &mut warnings)?;
    for w in &warnings {
        log::warn!("{w}");
    }
    if let Some(plan) = recipe.summary() {
        io::write_json(&out.join(layout::PLAN), &plan)?;
    }

    let results = with_workers(config.workers, || {
        config
            .seeds
            .par_iter()
            .map(|&s| run_seed(config, &splits, &recipe, s, out))
            .collect::<Result<Vec<_>>>()
    })?;

    let total_steps = results[0].0.total_steps;
    if let Some((m, _)) = results.iter().find(|(m, _)| m.total_steps != total_steps) {
        return Err(Error::Mismatch(format!(
            "seed {} took {} steps, seed {} took {total_steps}",
            m.seed, m.total_steps, results[0].0.seed
        )));
    }
    let logs: Vec<RunLog> = results.iter().map(|(_, l)| l.clone()).collect();
    let curve = learning_curve(&logs, ACCURACY, VALIDATION)?;
    io::write_text(&out.join(layout::CURVE_CSV), &curve_csv(&curve))?;
    io::write_text(
        &out.join(layout::CURVE_SVG),
        &curves_svg(config.scheduler.name(), "validation accuracy", &[(config.scheduler.name(), &curve)]),
    )?;

    let mut accuracy = IndexMap::new();
    for c in &splits.tests {
        let name = c.split().as_str();
        let vals = results.iter().map(|(m, _)| m.accuracy[name]).collect();
        accuracy.insert(name.to_string(), SplitAccuracy::from_values(vals));
    }
    let summary = StudentSummary {
        scheduler: config.scheduler,
        metric,
        seeds: config.seeds.clone(),
        total_steps,
        best_steps: results.iter().map(|(m, _)| m.best_step).collect(),
        best_validation: SplitAccuracy::from_values(results.iter().map(|(m, _)| m.best_validation).collect()),
        accuracy,
        warnings,
    };
    io::write_json(&out.join(layout::METRICS), &summary)?;
    Ok(summary)
}

fn run_seed(
    config: &ExperimentConfig,
    splits: &Splits,
    recipe: &Recipe,
    s: u64,
    out: &Path,
) -> Result<(SeedMetrics, RunLog)> {
    let cfg = TrainConfig {
        seed: s,
        ..config.train.clone()
    };
    let train = &splits.train;
    let mut sampler = recipe.sampler(train.len(), &cfg)?;
    let run = trainer::train(train, &splits.validation, &cfg, sampler.as_mut(), ProbeSink::Disabled)?;
    let dir = seed_dir(out, s);
    run.log.write(&dir.join(layout::RUN_LOG))?;

    let mut accuracy = IndexMap::new();
    for c in &splits.tests {
        let correct = trainer::predict_correct(&run.params, c)?;
        let acc = correct.iter().filter(|&&b| b).count() as f64 / correct.len() as f64;
        let preds = c.ids().zip(&correct).map(|(id, &correct)| Prediction {
            example_id: id.to_string(),
            correct,
        });
        io::write_jsonl(&dir.join(layout::PREDICTIONS_DIR).join(format!("{}.jsonl", c.split().as_str())), preds)?;
        accuracy.insert(c.split().as_str().to_string(), acc);
    }
    let metrics = SeedMetrics {
        seed: s,
        total_steps: run.total_steps,
        best_step: run.log.best_step().ok_or(Error::Empty("validation log"))?,
        best_validation: run.log.best_val_metric().ok_or(Error::Empty("validation log"))?,
        accuracy,
    };
    io::write_json(&dir.join(layout::METRICS), &metrics)?;
    Ok((metrics, run.log))
}

fn build_recipe(
    config: &ExperimentConfig,
    inputs: &ScoreInputs,
    train: &Corpus,
    warnings: &mut Vec<String>,
) -> Result<(Recipe, Option<String>)> {
    let kind = config.scheduler;
    let Some(expected) = kind.metric() else {
        if let Some(p) = &inputs.scores {
            warnings.push(format!("scheduler random ignores the scores file {}", p.display()));
        }
        return Ok((Recipe::Random, None));
    };
    let path = inputs
        .scores
        .as_ref()
        .ok_or_else(|| Error::config("scores", format!("scheduler {kind} needs a {expected} scores file")))?;
    let scores = DifficultyScores::read(path)?;
    if scores.metric_name != expected {
        return Err(Error::Incompatible(format!(
            "scheduler {kind} is paired with {expected} scores, got {}",
            scores.metric_name
        )));
    }
    let variability_path = inputs.weights.clone().unwrap_or_else(|| sibling(path, difficulty::VARIABILITY));
    let variability = if kind.variability_weighted() {
        let v = DifficultyScores::read(&variability_path)?;
        if v.metric_name != difficulty::VARIABILITY {
            return Err(Error::Incompatible(format!(
                "weights file {} holds {} scores, not variability",
                variability_path.display(),
                v.metric_name
            )));
        }
        Some(v)
    } else if expected == difficulty::CONFIDENCE && variability_path.exists() {
        // Ties in confidence break by ascending variability when it is available.
        Some(DifficultyScores::read(&variability_path)?)
    } else {
        None
    };

    if kind.is_annealing() {
        let max_score = annealing_max_score(config, path, expected)?;
        let plan = build_annealing_plan(train, &scores, max_score, variability.as_ref())?;
        Ok((Recipe::Annealing(plan), Some(expected.to_string())))
    } else {
        let duration = competence_duration(config, train.len())?;
        let plan = build_competence_plan(
            train,
            &scores,
            variability.as_ref(),
            kind.variability_weighted(),
            config.curriculum.c0,
            duration,
            config.curriculum.form,
        )?;
        Ok((Recipe::Competence(plan), Some(expected.to_string())))
    }
}

fn sibling(path: &Path, metric: &str) -> PathBuf {
    path.with_file_name(format!("{metric}.jsonl"))
}

/// Largest attainable integer score: teacher epochs for correctness, the
/// number of other subsets for Cross-Review. Taken from the teacher's config
/// snapshot when the scores file sits in a teacher run directory.
fn annealing_max_score(config: &ExperimentConfig, scores: &Path, metric: &str) -> Result<usize> {
    let snapshot = scores
        .parent()
        .and_then(Path::parent)
        .map(|d| d.join(layout::CONFIG))
        .filter(|p| p.exists());
    let teacher_cfg = match snapshot {
        Some(p) => io::read_json::<ExperimentConfig>(&p)?,
        None => config.clone(),
    };
    Ok(match metric {
        difficulty::CROSS_REVIEW => teacher_cfg.cross_review.num_subsets - 1,
        _ => teacher_cfg.teacher_epochs(),
    })
}

/// Curriculum length `T` in optimizer steps.
pub fn competence_duration(config: &ExperimentConfig, train_size: usize) -> Result<usize> {
    let c = &config.curriculum;
    if let Some(t) = c.duration {
        if t == 0 {
            return Err(Error::config("curriculum.duration", "must be positive"));
        }
        return Ok(t);
    }
    let reference = match &c.baseline {
        Some(p) => baseline_best_step(p)?,
        None => config.train.total_steps(train_size) as f64,
    };
    Ok(((c.baseline_fraction * reference).round() as usize).max(1))
}

/// Best step of a baseline run log, or the mean best step of a student run
/// directory.
pub fn baseline_best_step(path: &Path) -> Result<f64> {
    if path.is_dir() {
        let summary = StudentSummary::read(path)?;
        if summary.best_steps.is_empty() {
            return Err(Error::Empty("baseline best steps"));
        }
        Ok(summary.best_steps.iter().sum::<usize>() as f64 / summary.best_steps.len() as f64)
    } else {
        let log = RunLog::read(path)?;
        log.best_step()
            .map(|s| s as f64)
            .ok_or(Error::Empty("baseline run log (no validation record)"))
    }
}
