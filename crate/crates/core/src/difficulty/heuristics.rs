use std::collections::HashMap;

use super::{DifficultyScores, LENGTH, RARITY};
use crate::corpus::Corpus;
use crate::error::Result;

/// Number of tokens over all segments; longer is harder.
pub fn length_metric(corpus: &Corpus) -> Result<DifficultyScores> {
    let scores = corpus
        .examples()
        .iter()
        .map(|e| (e.id.clone(), e.tokens.len() as f64))
        .collect();
    DifficultyScores::new(LENGTH, scores, false)
}

/// Unigram relative frequencies of a train corpus.
#[derive(Debug, Clone)]
pub struct Rarity {
    counts: HashMap<String, usize>,
    total: usize,
}

impl Rarity {
    pub fn fit(train: &Corpus) -> Self {
        let mut counts = HashMap::new();
        let mut total = 0;
        for tok in train.examples().iter().flat_map(|e| &e.tokens) {
            *counts.entry(tok.clone()).or_insert(0) += 1;
            total += 1;
        }
        Rarity { counts, total }
    }

    pub fn vocab_size(&self) -> usize {
        self.counts.len()
    }

    /// `count(w) / total`, or `1 / (total + V + 1)` for unseen tokens.
    pub fn frequency(&self, token: &str) -> f64 {
        match self.counts.get(token) {
            Some(&c) => c as f64 / self.total as f64,
            None => 1.0 / (self.total + self.counts.len() + 1) as f64,
        }
    }

    /// `-sum(log f(w))` over every token of the input.
    pub fn score<'a>(&self, tokens: impl IntoIterator<Item = &'a String>) -> f64 {
        tokens.into_iter().map(|t| -self.frequency(t).ln()).sum()
    }

    pub fn metric(&self, corpus: &Corpus) -> Result<DifficultyScores> {
        let scores = corpus
            .examples()
            .iter()
            .map(|e| (e.id.clone(), self.score(&e.tokens)))
            .collect();
        DifficultyScores::new(RARITY, scores, false)
    }
}

/// Rarity of each train example under the train-split frequencies.
pub fn rarity_metric(corpus: &Corpus) -> Result<DifficultyScores> {
    Rarity::fit(corpus).metric(corpus)
}
