use std::collections::HashMap;

use super::{DifficultyScores, PERPLEXITY};
use crate::corpus::Corpus;
use crate::error::{Error, Result};

/// Add-k smoothed unigram or bigram language model over train tokens.
///
/// Each segment is modeled separately; the bigram context of a segment's
/// first token is a begin-of-segment marker. The vocabulary size `V` is the
/// number of distinct train tokens.
#[derive(Debug, Clone)]
pub struct NgramLm {
    order: usize,
    add_k: f64,
    unigrams: HashMap<String, usize>,
    total: usize,
    /// `None` context is the begin-of-segment marker.
    bigrams: HashMap<(Option<String>, String), usize>,
    contexts: HashMap<Option<String>, usize>,
}

impl NgramLm {
    pub fn fit(train: &Corpus, order: usize, add_k: f64) -> Result<Self> {
        if !(1..=2).contains(&order) {
            return Err(Error::config("ngram.order", format!("must be 1 or 2, got {order}")));
        }
        if !(add_k > 0.0 && add_k.is_finite()) {
            return Err(Error::config("ngram.add_k", "must be positive"));
        }
        let mut lm = NgramLm {
            order,
            add_k,
            unigrams: HashMap::new(),
            total: 0,
            bigrams: HashMap::new(),
            contexts: HashMap::new(),
        };
        for seg in train.examples().iter().flat_map(|e| e.segments()) {
            let mut prev: Option<&String> = None;
            for tok in seg {
                *lm.unigrams.entry(tok.clone()).or_insert(0) += 1;
                lm.total += 1;
                if order == 2 {
                    *lm.bigrams.entry((prev.cloned(), tok.clone())).or_insert(0) += 1;
                    *lm.contexts.entry(prev.cloned()).or_insert(0) += 1;
                }
                prev = Some(tok);
            }
        }
        Ok(lm)
    }

    pub fn vocab_size(&self) -> usize {
        self.unigrams.len()
    }

    /// `P(token | prev)`; `prev` is ignored by the unigram model.
    pub fn prob(&self, prev: Option<&str>, token: &str) -> f64 {
        let k = self.add_k;
        let v = self.vocab_size() as f64;
        if self.order == 1 {
            let c = self.unigrams.get(token).copied().unwrap_or(0) as f64;
            return (c + k) / (self.total as f64 + k * v);
        }
        let ctx = prev.map(str::to_string);
        let c_ctx = self.contexts.get(&ctx).copied().unwrap_or(0) as f64;
        let c_pair = self.bigrams.get(&(ctx, token.to_string())).copied().unwrap_or(0) as f64;
        (c_pair + k) / (c_ctx + k * v)
    }

    /// `exp(mean(-log P))` over the segment; an empty segment gives 0.
    pub fn perplexity(&self, segment: &[String]) -> f64 {
        if segment.is_empty() {
            return 0.0;
        }
        let mut prev: Option<&str> = None;
        let mut nll = 0.0;
        for tok in segment {
            nll -= self.prob(prev, tok).ln();
            prev = Some(tok);
        }
        (nll / segment.len() as f64).exp()
    }

    /// Sum of segment perplexities for each example of `corpus`.
    pub fn metric(&self, corpus: &Corpus) -> Result<DifficultyScores> {
        let scores = corpus
            .examples()
            .iter()
            .map(|e| (e.id.clone(), e.segments().map(|s| self.perplexity(s)).sum()))
            .collect();
        DifficultyScores::new(PERPLEXITY, scores, false)
    }
}

/// Perplexity of each train example under an n-gram model fit on the train split.
pub fn perplexity_metric(corpus: &Corpus, order: usize, add_k: f64) -> Result<DifficultyScores> {
    NgramLm::fit(corpus, order, add_k)?.metric(corpus)
}
