//! Transfer-teacher curriculum learning driven by training dynamics.
//!
//! A teacher classifier is trained on random batches while every train
//! example is probed at the end of each epoch. The probes become per-example
//! statistics (confidence, correctness, variability), those become difficulty
//! scores, and a student is trained under a curriculum built from them.
//!
//! ```
//! use tdcurriculum::corpus::{generate_synthetic, SynthSpec};
//! use tdcurriculum::curricula::RandomSampler;
//! use tdcurriculum::trainer::{train, ProbeSink, TrainConfig};
//! use tdcurriculum::dynamics::compute_all;
//!
//! let spec = SynthSpec { train_size: 200, val_size: 50, test_size: 50, ..SynthSpec::default() };
//! let data = generate_synthetic(&spec)?;
//! let cfg = TrainConfig { epochs: 3, ..TrainConfig::default() };
//! let mut sampler = RandomSampler::new(data.train.len(), cfg.batch_size, 1);
//! let run = train(&data.train, &data.validation, &cfg, &mut sampler, ProbeSink::Collect)?;
//! let stats = compute_all(&run.probes)?;
//! assert_eq!(stats.len(), 200);
//! # Ok::<(), tdcurriculum::Error>(())
//! ```

pub mod analysis;
pub mod corpus;
pub mod curricula;
pub mod difficulty;
pub mod dynamics;
mod error;
pub mod io;
pub mod pipeline;
pub mod seed;
pub mod trainer;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/corpora.md")]
    mod corpora {}
    #[doc = include_str!("../../../book/src/dynamics.md")]
    mod dynamics {}
    #[doc = include_str!("../../../book/src/difficulty.md")]
    mod difficulty {}
    #[doc = include_str!("../../../book/src/schedulers.md")]
    mod schedulers {}
    #[doc = include_str!("../../../book/src/pipeline.md")]
    mod pipeline {}
    #[doc = include_str!("../../../book/src/analysis.md")]
    mod analysis {}
}
