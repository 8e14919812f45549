use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::config::ExperimentConfig;
use super::{layout, snapshot_config, with_workers};
use crate::curricula::RandomSampler;
use crate::difficulty::{self, CrossReviewConfig, DifficultyScores, Rarity, TdMetric};
use crate::dynamics;
use crate::error::{Error, Result};
use crate::io;
use crate::seed;
use crate::trainer::{self, write_probes, ProbeSink};

/// What `cmd_teacher` scores the train set with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TeacherMetric {
    /// Training dynamics of one teacher: confidence, correctness, variability.
    Dynamics,
    CrossReview,
    Length,
    Rarity,
    Perplexity,
}

impl TeacherMetric {
    pub fn name(self) -> &'static str {
        match self {
            TeacherMetric::Dynamics => "td",
            TeacherMetric::CrossReview => "cross-review",
            TeacherMetric::Length => "length",
            TeacherMetric::Rarity => "rarity",
            TeacherMetric::Perplexity => "ppl",
        }
    }

    /// The metric a scheduler needs in order to run.
    pub fn for_metric(metric: &str) -> Option<TeacherMetric> {
        match metric {
            difficulty::CONFIDENCE | difficulty::CORRECTNESS | difficulty::VARIABILITY => Some(TeacherMetric::Dynamics),
            difficulty::CROSS_REVIEW => Some(TeacherMetric::CrossReview),
            difficulty::LENGTH => Some(TeacherMetric::Length),
            difficulty::RARITY => Some(TeacherMetric::Rarity),
            difficulty::PERPLEXITY => Some(TeacherMetric::Perplexity),
            _ => None,
        }
    }
}

impl fmt::Display for TeacherMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TeacherMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "td" | "dynamics" => Ok(TeacherMetric::Dynamics),
            "cross-review" | "cross_review" => Ok(TeacherMetric::CrossReview),
            "length" => Ok(TeacherMetric::Length),
            "rarity" => Ok(TeacherMetric::Rarity),
            "ppl" | "perplexity" => Ok(TeacherMetric::Perplexity),
            _ => Err(Error::config(
                "metric",
                format!("unknown {s:?}; expected td, cross-review, length, rarity or ppl"),
            )),
        }
    }
}

/// Files written by one `cmd_teacher` call.
#[derive(Debug, Clone, PartialEq)]
pub struct TeacherOutcome {
    pub td_stats: Option<PathBuf>,
    pub scores: Vec<PathBuf>,
}

/// Score the train set and write the results under `out`.
///
/// With [`TeacherMetric::Dynamics`] a teacher is trained on random batches
/// for `teacher.epochs` (or `train.epochs`) epochs; its probes, statistics
/// and one scores file per statistic are written. The other metrics write a
/// single scores file into the same `scores/` directory. The config
/// snapshot is [`ExperimentConfig::teacher_view`].
pub fn cmd_teacher(config: &ExperimentConfig, metric: TeacherMetric, out: &Path) -> Result<TeacherOutcome> {
    config.validate()?;
    io::create_dir(out)?;
    snapshot_config(&config.teacher_view(), out)?;
    let splits = config.load_data()?;
    let train = &splits.train;
    let scores_dir = out.join(layout::SCORES_DIR);

    let write = |s: &DifficultyScores| -> Result<PathBuf> {
        let path = scores_dir.join(format!("{}.jsonl", s.metric_name));
        s.write(&path)?;
        Ok(path)
    };

    match metric {
        TeacherMetric::Dynamics => {
            let cfg = config.teacher_train_config();
            let mut sampler = RandomSampler::new(train.len(), cfg.batch_size, seed::derive(cfg.seed, "sampler"));
            let run = trainer::train(train, &splits.validation, &cfg, &mut sampler, ProbeSink::Collect)?;
            run.log.write(&out.join(layout::TEACHER_LOG))?;
            write_probes(&out.join(layout::PROBES), &run.probes)?;
            let stats = dynamics::compute_all(&run.probes)?;
            let td_path = out.join(layout::TD_STATS);
            dynamics::write_td_stats(&td_path, &stats)?;
            let scores = [TdMetric::Confidence, TdMetric::Correctness, TdMetric::Variability]
                .into_iter()
                .map(|m| write(&difficulty::from_td(train, &stats, m)?))
                .collect::<Result<Vec<_>>>()?;
            log::info!("teacher: {} epochs, best validation accuracy {:?}", cfg.epochs, run.log.best_val_metric());
            Ok(TeacherOutcome {
                td_stats: Some(td_path),
                scores,
            })
        }
        TeacherMetric::CrossReview => {
            let cr = CrossReviewConfig {
                num_subsets: config.cross_review.num_subsets,
                seed: config.teacher.seed,
                train: config.teacher_train_config(),
            };
            let outcome = with_workers(config.workers, || difficulty::cross_review(train, &splits.validation, &cr))?;
            let folds: Vec<Vec<&str>> = outcome
                .folds
                .iter()
                .map(|f| f.iter().map(|&i| train.examples()[i].id.as_str()).collect())
                .collect();
            io::write_json(&out.join(layout::FOLDS), &folds)?;
            Ok(TeacherOutcome {
                td_stats: None,
                scores: vec![write(&outcome.scores)?],
            })
        }
        TeacherMetric::Length => single(write(&difficulty::length_metric(train)?)?),
        TeacherMetric::Rarity => single(write(&Rarity::fit(train).metric(train)?)?),
        TeacherMetric::Perplexity => single(write(&difficulty::perplexity_metric(
            train,
            config.ngram.order,
            config.ngram.add_k,
        )?)?),
    }
}

fn single(path: PathBuf) -> Result<TeacherOutcome> {
    Ok(TeacherOutcome {
        td_stats: None,
        scores: vec![path],
    })
}
