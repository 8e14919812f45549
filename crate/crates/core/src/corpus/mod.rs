//! Examples, corpora, tokenization and hashed features, JSONL I/O and the
//! synthetic data generator.

mod jsonl;
mod synth;
mod text;

pub use jsonl::{load_jsonl, read_label_map, write_jsonl, write_label_map};
pub use synth::{generate_synthetic, SynthSpec, SynthSplits};
pub use text::{featurize, fnv1a64, hash_index, hashed_counts, tokenize, SparseVec, DEFAULT_HASH_DIM};

use std::collections::HashMap;
use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Suffix marking examples whose label was deliberately corrupted.
pub const NOISY_SUFFIX: &str = "#noisy";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Validation,
    TestId,
    TestOod,
    TestTransfer,
}

impl Split {
    pub const ALL: [Split; 5] = [
        Split::Train,
        Split::Validation,
        Split::TestId,
        Split::TestOod,
        Split::TestTransfer,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::TestId => "test_id",
            Split::TestOod => "test_ood",
            Split::TestTransfer => "test_transfer",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One labeled instance. `tokens` holds the tokens of `text_a` followed by
/// those of `text_b`; `segment_split` marks the boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub id: String,
    pub text_a: String,
    pub text_b: Option<String>,
    pub tokens: Vec<String>,
    pub segment_split: usize,
    pub features: SparseVec,
    pub label: usize,
}

impl Example {
    /// Tokenize and featurize raw text.
    pub fn from_text(
        id: impl Into<String>,
        text_a: impl Into<String>,
        text_b: Option<String>,
        label: usize,
        dim: usize,
    ) -> Self {
        let text_a = text_a.into();
        let tokens_a = tokenize(&text_a);
        let tokens_b = text_b.as_deref().map(tokenize);
        let features = featurize(&tokens_a, tokens_b.as_deref(), dim);
        Self::assemble(id.into(), text_a, text_b, tokens_a, tokens_b, features, label)
    }

    /// Tokenize the text but take the features as given.
    pub fn with_features(
        id: impl Into<String>,
        text_a: impl Into<String>,
        text_b: Option<String>,
        label: usize,
        features: SparseVec,
    ) -> Self {
        let text_a = text_a.into();
        let tokens_a = tokenize(&text_a);
        let tokens_b = text_b.as_deref().map(tokenize);
        Self::assemble(id.into(), text_a, text_b, tokens_a, tokens_b, features, label)
    }

    fn assemble(
        id: String,
        text_a: String,
        text_b: Option<String>,
        mut tokens: Vec<String>,
        tokens_b: Option<Vec<String>>,
        features: SparseVec,
        label: usize,
    ) -> Self {
        let segment_split = tokens.len();
        tokens.extend(tokens_b.into_iter().flatten());
        Example {
            id,
            text_a,
            text_b,
            tokens,
            segment_split,
            features,
            label,
        }
    }

    pub fn tokens_a(&self) -> &[String] {
        &self.tokens[..self.segment_split]
    }

    pub fn tokens_b(&self) -> Option<&[String]> {
        self.text_b.as_ref().map(|_| &self.tokens[self.segment_split..])
    }

    /// The token lists of each present segment.
    pub fn segments(&self) -> impl Iterator<Item = &[String]> {
        std::iter::once(self.tokens_a()).chain(self.tokens_b())
    }

    pub fn is_noisy(&self) -> bool {
        is_noisy_id(&self.id)
    }
}

pub fn is_noisy_id(id: &str) -> bool {
    id.ends_with(NOISY_SUFFIX)
}

/// Label string to class index, in index order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LabelMap(IndexMap<String, usize>);

impl LabelMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_labels<I, S>(labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut m = Self::new();
        for l in labels {
            m.insert(l.into());
        }
        m
    }

    /// Index of `label`, assigning the next free index if it is new.
    pub fn insert(&mut self, label: String) -> usize {
        let next = self.0.len();
        *self.0.entry(label).or_insert(next)
    }

    pub fn get(&self, label: &str) -> Option<usize> {
        self.0.get(label).copied()
    }

    pub fn name(&self, index: usize) -> Option<&str> {
        self.0
            .iter()
            .find(|(_, &i)| i == index)
            .map(|(l, _)| l.as_str())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn validate(&self) -> Result<()> {
        let mut seen = vec![false; self.len()];
        for (label, &i) in &self.0 {
            if i >= seen.len() || std::mem::replace(&mut seen[i], true) {
                return Err(Error::config(
                    "label_map",
                    format!("indices must be a permutation of 0..{}; {label:?} has {i}", self.len()),
                ));
            }
        }
        Ok(())
    }
}

/// An ordered set of examples from one split sharing a label map and a
/// feature dimension.
#[derive(Debug, Clone)]
pub struct Corpus {
    split: Split,
    examples: Vec<Example>,
    labels: LabelMap,
    dim: usize,
    explicit_features: bool,
    by_id: HashMap<String, usize>,
}

impl Corpus {
    /// Validate and assemble a corpus. `explicit_features` records that the
    /// feature vectors are not derived from the text and must be persisted.
    pub fn new(
        split: Split,
        examples: Vec<Example>,
        labels: LabelMap,
        dim: usize,
        explicit_features: bool,
    ) -> Result<Self> {
        labels.validate()?;
        if labels.is_empty() {
            return Err(Error::config("label_map", "no classes"));
        }
        let mut by_id = HashMap::with_capacity(examples.len());
        for (i, ex) in examples.iter().enumerate() {
            if by_id.insert(ex.id.clone(), i).is_some() {
                return Err(Error::DuplicateId(ex.id.clone()));
            }
            if ex.label >= labels.len() {
                return Err(Error::Shape(format!(
                    "example {:?} has label {} but there are {} classes",
                    ex.id,
                    ex.label,
                    labels.len()
                )));
            }
            if ex.features.max_index().is_some_and(|m| m >= dim) {
                return Err(Error::Shape(format!(
                    "example {:?} has a feature index outside [0, {dim})",
                    ex.id
                )));
            }
        }
        Ok(Corpus {
            split,
            examples,
            labels,
            dim,
            explicit_features,
            by_id,
        })
    }

    pub fn split(&self) -> Split {
        self.split
    }

    pub fn examples(&self) -> &[Example] {
        &self.examples
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &LabelMap {
        &self.labels
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn explicit_features(&self) -> bool {
        self.explicit_features
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.by_id.get(id).copied()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.examples.iter().map(|e| e.id.as_str())
    }

    /// A copy of this corpus restricted to the given example indices, in that order.
    pub fn subset(&self, indices: &[usize]) -> Corpus {
        let examples: Vec<Example> = indices.iter().map(|&i| self.examples[i].clone()).collect();
        Corpus::new(self.split, examples, self.labels.clone(), self.dim, self.explicit_features)
            .expect("subset of a valid corpus is valid")
    }

    /// A copy with every label replaced by `f(index, example)`.
    pub fn relabeled(&self, mut f: impl FnMut(usize, &Example) -> usize) -> Result<Corpus> {
        let examples = self
            .examples
            .iter()
            .enumerate()
            .map(|(i, e)| Example { label: f(i, e), ..e.clone() })
            .collect();
        Corpus::new(self.split, examples, self.labels.clone(), self.dim, self.explicit_features)
    }
}
