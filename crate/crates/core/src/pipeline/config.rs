use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{self, Corpus, LabelMap, Split, SynthSpec, DEFAULT_HASH_DIM};
use crate::curricula::CompetenceForm;
use crate::difficulty;
use crate::error::{Error, Result};
use crate::io;
use crate::trainer::TrainConfig;

/// One experiment, read from a single JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub data: DataConfig,
    pub train: TrainConfig,
    #[serde(default)]
    pub teacher: TeacherConfig,
    #[serde(default)]
    pub scheduler: SchedulerKind,
    #[serde(default)]
    pub curriculum: CurriculumConfig,
    #[serde(default)]
    pub cross_review: CrossReviewSettings,
    #[serde(default)]
    pub ngram: NgramConfig,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default = "default_rounds")]
    pub ar_rounds: usize,
}

fn default_seeds() -> Vec<u64> {
    vec![1, 2, 3]
}

fn default_workers() -> usize {
    1
}

fn default_rounds() -> usize {
    crate::analysis::DEFAULT_ROUNDS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataConfig {
    Synthetic(SynthSpec),
    Files(FileData),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileData {
    pub train: Option<PathBuf>,
    pub validation: Option<PathBuf>,
    pub test_id: Option<PathBuf>,
    #[serde(default)]
    pub test_ood: Option<PathBuf>,
    #[serde(default)]
    pub test_transfer: Option<PathBuf>,
    #[serde(default)]
    pub label_map: Option<PathBuf>,
    #[serde(default = "default_hash_dim")]
    pub hash_dim: usize,
}

fn default_hash_dim() -> usize {
    DEFAULT_HASH_DIM
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TeacherConfig {
    /// Teacher epochs when different from `train.epochs` (limited-budget teachers).
    #[serde(default)]
    pub epochs: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurriculumConfig {
    #[serde(default = "default_c0")]
    pub c0: f64,
    /// Explicit curriculum length in optimizer steps.
    #[serde(default)]
    pub duration: Option<usize>,
    /// Random-baseline run log or student directory; the duration becomes
    /// `baseline_fraction` of its best step.
    #[serde(default)]
    pub baseline: Option<PathBuf>,
    #[serde(default = "default_fraction")]
    pub baseline_fraction: f64,
    #[serde(default)]
    pub form: CompetenceForm,
}

fn default_c0() -> f64 {
    0.01
}

fn default_fraction() -> f64 {
    0.9
}

impl Default for CurriculumConfig {
    fn default() -> Self {
        CurriculumConfig {
            c0: default_c0(),
            duration: None,
            baseline: None,
            baseline_fraction: default_fraction(),
            form: CompetenceForm::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossReviewSettings {
    #[serde(default = "default_subsets")]
    pub num_subsets: usize,
}

fn default_subsets() -> usize {
    10
}

impl Default for CrossReviewSettings {
    fn default() -> Self {
        CrossReviewSettings {
            num_subsets: default_subsets(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NgramConfig {
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default = "default_add_k")]
    pub add_k: f64,
}

fn default_order() -> usize {
    2
}

fn default_add_k() -> f64 {
    1.0
}

impl Default for NgramConfig {
    fn default() -> Self {
        NgramConfig {
            order: default_order(),
            add_k: default_add_k(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SchedulerKind {
    #[default]
    #[serde(rename = "random")]
    Random,
    #[serde(rename = "cr_anneal")]
    CrAnneal,
    #[serde(rename = "corr_anneal")]
    CorrAnneal,
    #[serde(rename = "conf_comp")]
    ConfComp,
    #[serde(rename = "corr+var_anneal")]
    CorrVarAnneal,
    #[serde(rename = "conf+var_comp")]
    ConfVarComp,
    #[serde(rename = "length")]
    Length,
    #[serde(rename = "rarity")]
    Rarity,
    #[serde(rename = "ppl")]
    Ppl,
}

impl SchedulerKind {
    pub const ALL: [SchedulerKind; 9] = [
        SchedulerKind::Random,
        SchedulerKind::CrAnneal,
        SchedulerKind::CorrAnneal,
        SchedulerKind::ConfComp,
        SchedulerKind::CorrVarAnneal,
        SchedulerKind::ConfVarComp,
        SchedulerKind::Length,
        SchedulerKind::Rarity,
        SchedulerKind::Ppl,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchedulerKind::Random => "random",
            SchedulerKind::CrAnneal => "cr_anneal",
            SchedulerKind::CorrAnneal => "corr_anneal",
            SchedulerKind::ConfComp => "conf_comp",
            SchedulerKind::CorrVarAnneal => "corr+var_anneal",
            SchedulerKind::ConfVarComp => "conf+var_comp",
            SchedulerKind::Length => "length",
            SchedulerKind::Rarity => "rarity",
            SchedulerKind::Ppl => "ppl",
        }
    }

    /// Metric each scheduler is paired with; `None` for the random baseline.
    pub fn metric(self) -> Option<&'static str> {
        match self {
            SchedulerKind::Random => None,
            SchedulerKind::CrAnneal => Some(difficulty::CROSS_REVIEW),
            SchedulerKind::CorrAnneal | SchedulerKind::CorrVarAnneal => Some(difficulty::CORRECTNESS),
            SchedulerKind::ConfComp | SchedulerKind::ConfVarComp => Some(difficulty::CONFIDENCE),
            SchedulerKind::Length => Some(difficulty::LENGTH),
            SchedulerKind::Rarity => Some(difficulty::RARITY),
            SchedulerKind::Ppl => Some(difficulty::PERPLEXITY),
        }
    }

    pub fn is_annealing(self) -> bool {
        matches!(
            self,
            SchedulerKind::CrAnneal | SchedulerKind::CorrAnneal | SchedulerKind::CorrVarAnneal
        )
    }

    pub fn variability_weighted(self) -> bool {
        matches!(self, SchedulerKind::CorrVarAnneal | SchedulerKind::ConfVarComp)
    }
}

impl fmt::Display for SchedulerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchedulerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SchedulerKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = SchedulerKind::ALL.iter().map(|k| k.name()).collect();
                Error::config("scheduler", format!("unknown {s:?}; expected one of {}", names.join(", ")))
            })
    }
}

/// The corpora of one experiment. `tests` holds every evaluation split
/// that was provided, in [`Split`] order.
#[derive(Debug, Clone)]
pub struct Splits {
    pub train: Corpus,
    pub validation: Corpus,
    pub tests: Vec<Corpus>,
}

impl ExperimentConfig {
    /// Read a config; relative data paths resolve against the config's directory.
    pub fn load(path: &Path) -> Result<Self> {
        if !path.is_file() {
            return Err(Error::config("config", format!("{} does not exist", path.display())));
        }
        let mut cfg: ExperimentConfig = io::read_json(path)?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.resolve_paths(base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(path) = p {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
        };
        if let DataConfig::Files(f) = &mut self.data {
            for p in [
                &mut f.train,
                &mut f.validation,
                &mut f.test_id,
                &mut f.test_ood,
                &mut f.test_transfer,
                &mut f.label_map,
            ] {
                fix(p);
            }
        }
        fix(&mut self.curriculum.baseline);
    }

    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        match &self.data {
            DataConfig::Synthetic(s) => s.validate()?,
            DataConfig::Files(f) => {
                for (name, p) in [("train", &f.train), ("validation", &f.validation), ("test_id", &f.test_id)] {
                    if p.is_none() {
                        return Err(Error::config(format!("data.files.{name}"), "path is required"));
                    }
                }
                if !f.hash_dim.is_power_of_two() {
                    return Err(Error::config("data.files.hash_dim", "must be a power of two"));
                }
            }
        }
        if self.seeds.is_empty() {
            return Err(Error::config("seeds", "at least one seed is required"));
        }
        if self.workers == 0 {
            return Err(Error::config("workers", "must be positive"));
        }
        if self.teacher.epochs == Some(0) {
            return Err(Error::config("teacher.epochs", "must be positive"));
        }
        if !(self.curriculum.c0 > 0.0 && self.curriculum.c0 <= 1.0) {
            return Err(Error::config("curriculum.c0", "must lie in (0, 1]"));
        }
        if self.curriculum.baseline_fraction.is_nan() || self.curriculum.baseline_fraction <= 0.0 {
            return Err(Error::config("curriculum.baseline_fraction", "must be positive"));
        }
        if self.cross_review.num_subsets < 2 {
            return Err(Error::config("cross_review.num_subsets", "must be at least 2"));
        }
        if !(1..=2).contains(&self.ngram.order) {
            return Err(Error::config("ngram.order", "must be 1 or 2"));
        }
        if self.ar_rounds == 0 {
            return Err(Error::config("ar_rounds", "must be positive"));
        }
        Ok(())
    }

    pub fn teacher_epochs(&self) -> usize {
        self.teacher.epochs.unwrap_or(self.train.epochs)
    }

    /// The config with every field that cannot affect teacher or scoring
    /// runs reset to its default, so teacher snapshots stay comparable
    /// across sweeps that differ only in student settings.
    pub fn teacher_view(&self) -> ExperimentConfig {
        ExperimentConfig {
            scheduler: SchedulerKind::Random,
            curriculum: CurriculumConfig::default(),
            seeds: default_seeds(),
            workers: default_workers(),
            ar_rounds: default_rounds(),
            ..self.clone()
        }
    }

    pub fn teacher_train_config(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.teacher_epochs(),
            seed: self.teacher.seed,
            ..self.train.clone()
        }
    }

    pub fn load_data(&self) -> Result<Splits> {
        match &self.data {
            DataConfig::Synthetic(spec) => {
                let s = corpus::generate_synthetic(spec)?;
                Ok(Splits {
                    train: s.train,
                    validation: s.validation,
                    tests: vec![s.test_id, s.test_ood],
                })
            }
            DataConfig::Files(f) => {
                let required = |p: &Option<PathBuf>, name: &str| -> Result<PathBuf> {
                    let p = p
                        .clone()
                        .ok_or_else(|| Error::config(format!("data.files.{name}"), "path is required"))?;
                    existing(p, name)
                };
                let sidecar: Option<LabelMap> = f
                    .label_map
                    .clone()
                    .map(|p| existing(p, "label_map").and_then(|p| corpus::read_label_map(&p)))
                    .transpose()?;
                let train = corpus::load_jsonl(&required(&f.train, "train")?, Split::Train, sidecar.as_ref(), f.hash_dim)?;
                let labels = train.labels().clone();
                let load = |p: &Path, split| corpus::load_jsonl(p, split, Some(&labels), f.hash_dim);
                let validation = load(&required(&f.validation, "validation")?, Split::Validation)?;
                let mut tests = vec![load(&required(&f.test_id, "test_id")?, Split::TestId)?];
                if let Some(p) = &f.test_ood {
                    tests.push(load(&existing(p.clone(), "test_ood")?, Split::TestOod)?);
                }
                if let Some(p) = &f.test_transfer {
                    tests.push(load(&existing(p.clone(), "test_transfer")?, Split::TestTransfer)?);
                }
                Ok(Splits { train, validation, tests })
            }
        }
    }
}

fn existing(path: PathBuf, name: &str) -> Result<PathBuf> {
    if path.is_file() {
        Ok(path)
    } else {
        Err(Error::config(format!("data.files.{name}"), format!("{} does not exist", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scheduler_names_round_trip() {
        for k in SchedulerKind::ALL {
            assert_eq!(k.name().parse::<SchedulerKind>().unwrap(), k);
            let json = serde_json::to_string(&k).unwrap();
            assert_eq!(json, format!("\"{}\"", k.name()));
        }
        assert!("nope".parse::<SchedulerKind>().is_err());
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg: ExperimentConfig = serde_json::from_str(
            r#"{"data":{"synthetic":{"num_classes":2,"train_size":10,"val_size":5,"test_size":5,
                "feature_dim":4,"class_separation":2.0,"seed":1}},
                "train":{"epochs":2,"batch_size":4,"learning_rate":0.1}}"#,
        )
        .unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.seeds, [1, 2, 3]);
        assert_eq!(cfg.curriculum.c0, 0.01);
        assert_eq!(cfg.train.grad_clip, 1.0);
        assert_eq!(cfg.train.eval_per_epoch, 10);
        assert_eq!(cfg.scheduler, SchedulerKind::Random);
    }

    #[test]
    fn missing_validation_is_named() {
        let cfg: ExperimentConfig = serde_json::from_str(
            r#"{"data":{"files":{"train":"t.jsonl","test_id":"x.jsonl"}},
                "train":{"epochs":2,"batch_size":4,"learning_rate":0.1}}"#,
        )
        .unwrap();
        let err = cfg.validate().unwrap_err();
        assert!(err.is_validation());
        assert!(err.to_string().contains("validation"));
    }
}
