use rand::seq::SliceRandom;

use crate::seed::{self, Rng};
use crate::trainer::Sampler;

/// Endless sequence of shuffled epochs over a fixed pool, cut into batches.
#[derive(Debug, Clone)]
pub struct EpochCycler {
    pool: Vec<usize>,
    order: Vec<usize>,
    batch_size: usize,
    cursor: usize,
    rng: Rng,
}

impl EpochCycler {
    pub fn new(pool: Vec<usize>, batch_size: usize, rng: Rng) -> Self {
        EpochCycler {
            order: Vec::new(),
            pool,
            batch_size,
            cursor: 0,
            rng,
        }
    }

    pub fn epoch_length(&self) -> usize {
        self.pool.len().div_ceil(self.batch_size)
    }

    pub fn next_batch(&mut self) -> Vec<usize> {
        if self.cursor >= self.order.len() {
            self.order.clone_from(&self.pool);
            self.order.shuffle(&mut self.rng);
            self.cursor = 0;
        }
        let end = (self.cursor + self.batch_size).min(self.order.len());
        let batch = self.order[self.cursor..end].to_vec();
        self.cursor = end;
        batch
    }
}

/// Standard random-order training: a fresh seeded shuffle each epoch,
/// consumed without replacement.
#[derive(Debug, Clone)]
pub struct RandomSampler {
    cycler: EpochCycler,
}

impl RandomSampler {
    pub fn new(num_examples: usize, batch_size: usize, seed: u64) -> Self {
        RandomSampler {
            cycler: EpochCycler::new((0..num_examples).collect(), batch_size, seed::rng(seed)),
        }
    }
}

impl Sampler for RandomSampler {
    fn next_batch(&mut self, _step: usize) -> Option<Vec<usize>> {
        Some(self.cycler.next_batch())
    }

    fn epoch_length(&self) -> usize {
        self.cycler.epoch_length()
    }
}
