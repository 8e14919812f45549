//! Mini-batch training of a small softmax classifier with validation-based
//! checkpoint selection and epoch-end probing of every train example.

mod log;
mod model;

pub use log::{read_probes, write_probes, EpochProbe, LogRecord, ProbeEntry, RunLog, ACCURACY, VALIDATION};
pub use model::{argmax, clip_grad_norm, forward, loss_and_grad, softmax, Grads, Layer, ModelParams, Sgd};

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Example};
use crate::error::{Error, Result};
use crate::seed;

pub const MOMENTUM: f64 = 0.9;

/// Source of training batches. Batches are indices into the train corpus.
///
/// `next_batch` is called once per optimizer step with the number of steps
/// already taken; returning `None` is a contract violation. `epoch_length`
/// is the number of batches in one pass over the full train set.
pub trait Sampler {
    fn next_batch(&mut self, step: usize) -> Option<Vec<usize>>;
    fn epoch_length(&self) -> usize;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    #[serde(default)]
    pub weight_decay: f64,
    #[serde(default = "default_grad_clip")]
    pub grad_clip: f64,
    #[serde(default = "default_eval_per_epoch")]
    pub eval_per_epoch: usize,
    #[serde(default)]
    pub hidden_size: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_grad_clip() -> f64 {
    1.0
}

fn default_eval_per_epoch() -> usize {
    10
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 6,
            batch_size: 32,
            learning_rate: 0.5,
            weight_decay: 0.0,
            grad_clip: default_grad_clip(),
            eval_per_epoch: default_eval_per_epoch(),
            hidden_size: 0,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |f: &str, m: &str| Err(Error::config(format!("train.{f}"), m));
        if self.epochs == 0 {
            return bad("epochs", "must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch_size", "must be positive");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate", "must be positive");
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return bad("weight_decay", "must be nonnegative");
        }
        if self.grad_clip.is_nan() || self.grad_clip <= 0.0 {
            return bad("grad_clip", "must be positive");
        }
        if self.eval_per_epoch == 0 {
            return bad("eval_per_epoch", "must be positive");
        }
        Ok(())
    }

    pub fn steps_per_epoch(&self, train_size: usize) -> usize {
        train_size.div_ceil(self.batch_size)
    }

    /// Optimizer steps in a full run; identical for every scheduler.
    pub fn total_steps(&self, train_size: usize) -> usize {
        self.epochs * self.steps_per_epoch(train_size)
    }
}

/// In-epoch step offsets (1-based) at which validation runs: `eval_per_epoch`
/// evenly spaced points plus the epoch end, deduplicated.
pub fn eval_offsets(steps_per_epoch: usize, eval_per_epoch: usize) -> Vec<usize> {
    let mut v: Vec<usize> = (1..=eval_per_epoch)
        .map(|k| k * steps_per_epoch / eval_per_epoch)
        .filter(|&s| s > 0)
        .chain(std::iter::once(steps_per_epoch))
        .collect();
    v.dedup();
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeSink {
    Collect,
    Disabled,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters at the best validation checkpoint.
    pub params: ModelParams,
    pub log: RunLog,
    pub probes: Vec<EpochProbe>,
    /// Mean loss of every optimizer step, in order.
    pub batch_losses: Vec<f64>,
    pub total_steps: usize,
}

/// Train for `config.epochs` epochs of `steps_per_epoch` batches each.
///
/// Validation accuracy is logged at [`eval_offsets`]; the best (earliest on
/// ties) checkpoint is kept in memory and returned. At the end of each epoch
/// the whole train corpus is scored with the current parameters, which yields
/// the `train/accuracy` record and, with [`ProbeSink::Collect`], one
/// [`EpochProbe`].
pub fn train(
    corpus: &Corpus,
    val_corpus: &Corpus,
    config: &TrainConfig,
    sampler: &mut dyn Sampler,
    probe_sink: ProbeSink,
) -> Result<TrainOutcome> {
    config.validate()?;
    if corpus.is_empty() {
        return Err(Error::Empty("train corpus"));
    }
    if val_corpus.is_empty() {
        return Err(Error::Empty("validation corpus"));
    }
    if corpus.dim() != val_corpus.dim() || corpus.num_classes() != val_corpus.num_classes() {
        return Err(Error::Shape("train and validation corpora disagree on dimension or classes".into()));
    }
    let n = corpus.len();
    let spe = config.steps_per_epoch(n);
    if sampler.epoch_length() != spe {
        return Err(Error::Mismatch(format!(
            "sampler epoch length {} but {n} examples at batch size {} need {spe}",
            sampler.epoch_length(),
            config.batch_size
        )));
    }

    let mut rng = seed::rng(seed::derive(config.seed, "init"));
    let mut params = ModelParams::init(corpus.dim(), config.hidden_size, corpus.num_classes(), &mut rng);
    let mut opt = Sgd::new(&params, config.learning_rate, MOMENTUM, config.weight_decay);
    let mut best = params.clone();
    let mut log = RunLog::new();
    let mut probes = Vec::new();
    let mut batch_losses = Vec::with_capacity(config.total_steps(n));
    let offsets = eval_offsets(spe, config.eval_per_epoch);
    let examples = corpus.examples();

    let mut window = (0.0, 0usize);
    for epoch in 1..=config.epochs {
        let mut next_eval = offsets.iter().peekable();
        for s in 1..=spe {
            let taken = (epoch - 1) * spe + s - 1;
            let batch = sampler.next_batch(taken).ok_or(Error::SamplerExhausted(taken))?;
            let refs: Vec<&Example> = batch
                .iter()
                .map(|&i| {
                    examples
                        .get(i)
                        .ok_or_else(|| Error::Shape(format!("sampler produced index {i} for {n} examples")))
                })
                .collect::<Result<_>>()?;
            let (loss, mut grads) = loss_and_grad(&params, &refs, 0.0)?;
            clip_grad_norm(&mut grads, &params, config.grad_clip);
            opt.step(&mut params, &grads);
            batch_losses.push(loss);
            window = (window.0 + loss, window.1 + 1);

            let step = taken + 1;
            if next_eval.next_if_eq(&&s).is_some() {
                log.push(step, "train", "loss", window.0 / window.1 as f64);
                window = (0.0, 0);
                let acc = evaluate(&params, val_corpus)?;
                if log.push(step, VALIDATION, ACCURACY, acc) {
                    best.clone_from(&params);
                }
            }
        }

        let probe = probe_corpus(&params, corpus, epoch)?;
        let correct = probe.entries.iter().filter(|e| e.correct).count();
        log.push(epoch * spe, "train", ACCURACY, correct as f64 / n as f64);
        if probe_sink == ProbeSink::Collect {
            probes.push(probe);
        }
    }
    if !params.is_finite() {
        return Err(Error::Undefined("training diverged to non-finite parameters".into()));
    }

    Ok(TrainOutcome {
        params: best,
        log,
        probes,
        batch_losses,
        total_steps: config.total_steps(n),
    })
}

/// Gold probability and correctness for every example of `corpus`.
pub fn probe_corpus(params: &ModelParams, corpus: &Corpus, epoch: usize) -> Result<EpochProbe> {
    let entries = corpus
        .examples()
        .iter()
        .map(|ex| {
            let probs = forward(params, &ex.features)?;
            Ok(ProbeEntry {
                example_id: ex.id.clone(),
                gold_prob: probs[ex.label],
                correct: argmax(&probs) == ex.label,
            })
        })
        .collect::<Result<_>>()?;
    Ok(EpochProbe { epoch, entries })
}

/// Per-example argmax correctness.
pub fn predict_correct(params: &ModelParams, corpus: &Corpus) -> Result<Vec<bool>> {
    corpus
        .examples()
        .iter()
        .map(|ex| Ok(argmax(&forward(params, &ex.features)?) == ex.label))
        .collect()
}

/// Fraction of examples whose argmax prediction (ties to the lowest class)
/// matches the label.
pub fn evaluate(params: &ModelParams, corpus: &Corpus) -> Result<f64> {
    if corpus.is_empty() {
        return Err(Error::Empty("evaluation corpus"));
    }
    let correct = predict_correct(params, corpus)?.into_iter().filter(|&c| c).count();
    Ok(correct as f64 / corpus.len() as f64)
}
