use serde::{Deserialize, Serialize};

/// Default hashing dimension for text corpora (2^18).
pub const DEFAULT_HASH_DIM: usize = 1 << 18;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    fnv1a64_from(FNV_OFFSET, bytes)
}

fn fnv1a64_from(mut h: u64, bytes: &[u8]) -> u64 {
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// Lowercase and split on whitespace and punctuation. Every character that is
/// neither alphanumeric nor whitespace becomes a token of its own.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut word = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            word.extend(ch.to_lowercase());
            continue;
        }
        if !word.is_empty() {
            out.push(std::mem::take(&mut word));
        }
        if !ch.is_whitespace() {
            out.push(ch.to_lowercase().collect());
        }
    }
    if !word.is_empty() {
        out.push(word);
    }
    out
}

/// Sparse feature vector: `(index, weight)` pairs sorted by index, no
/// duplicate indices, no zero weights.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SparseVec(Vec<(u32, f64)>);

impl SparseVec {
    /// Build from arbitrary pairs; duplicates are summed and zeros dropped.
    pub fn from_pairs(mut pairs: Vec<(u32, f64)>) -> Self {
        pairs.sort_by_key(|&(i, _)| i);
        let mut out: Vec<(u32, f64)> = Vec::with_capacity(pairs.len());
        for (i, w) in pairs {
            match out.last_mut() {
                Some(last) if last.0 == i => last.1 += w,
                _ => out.push((i, w)),
            }
        }
        out.retain(|&(_, w)| w != 0.0);
        SparseVec(out)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.0.iter().map(|&(i, w)| (i as usize, w))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|&(_, w)| w * w).sum()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.0.last().map(|&(i, _)| i as usize)
    }

    /// Scale to unit L2 norm; the zero vector stays zero.
    pub fn normalized(mut self) -> Self {
        let n = self.norm_sq().sqrt();
        if n > 0.0 {
            for e in &mut self.0 {
                e.1 /= n;
            }
        }
        self
    }
}

/// Index of `token` in segment `segment` (0 or 1). The segment byte is hashed
/// before the token, giving each segment its own hash function.
pub fn hash_index(token: &str, segment: u8, dim: usize) -> u32 {
    debug_assert!(dim.is_power_of_two());
    let h = fnv1a64_from(fnv1a64_from(FNV_OFFSET, &[segment, 0x1f]), token.as_bytes());
    (h & (dim as u64 - 1)) as u32
}

/// Unnormalized hashed bag-of-tokens counts.
pub fn hashed_counts(tokens_a: &[String], tokens_b: Option<&[String]>, dim: usize) -> SparseVec {
    let a = tokens_a.iter().map(|t| (hash_index(t, 0, dim), 1.0));
    let b = tokens_b
        .into_iter()
        .flatten()
        .map(|t| (hash_index(t, 1, dim), 1.0));
    SparseVec::from_pairs(a.chain(b).collect())
}

/// Hashed bag-of-tokens, L2-normalized. `dim` must be a power of two.
pub fn featurize(tokens_a: &[String], tokens_b: Option<&[String]>, dim: usize) -> SparseVec {
    hashed_counts(tokens_a, tokens_b, dim).normalized()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &[&str]) -> Vec<String> {
        s.iter().map(|t| t.to_string()).collect()
    }

    #[test]
    fn tokenize_examples() {
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("The cat sat."), toks(&["the", "cat", "sat", "."]));
        assert_eq!(tokenize("A-B"), toks(&["a", "-", "b"]));
        assert_eq!(tokenize("  Hi,\tthere!! "), toks(&["hi", ",", "there", "!", "!"]));
        assert_eq!(tokenize("Straße ÉTÉ"), toks(&["straße", "été"]));
    }

    #[test]
    fn fnv_reference_values() {
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn featurize_empty() {
        assert!(featurize(&[], None, 1024).is_empty());
    }

    #[test]
    fn featurize_counts_then_normalizes() {
        let t = toks(&["a", "a", "b"]);
        let raw = hashed_counts(&t, None, DEFAULT_HASH_DIM);
        assert_eq!(raw.len(), 2);
        let mut ws: Vec<f64> = raw.iter().map(|(_, w)| w).collect();
        ws.sort_by(f64::total_cmp);
        assert_eq!(ws, vec![1.0, 2.0]);
        let f = featurize(&t, None, DEFAULT_HASH_DIM);
        assert!((f.norm_sq() - 1.0).abs() < 1e-12);
        assert_eq!(f, featurize(&t, None, DEFAULT_HASH_DIM));
    }

    #[test]
    fn segments_use_distinct_hashes() {
        let t = toks(&["cat"]);
        let a = featurize(&t, None, DEFAULT_HASH_DIM);
        let b = featurize(&[], Some(&t), DEFAULT_HASH_DIM);
        assert_ne!(a, b);
    }

    #[test]
    fn sparse_from_pairs_merges() {
        let v = SparseVec::from_pairs(vec![(3, 1.0), (1, 2.0), (3, 1.5), (2, 0.0)]);
        assert_eq!(v, SparseVec(vec![(1, 2.0), (3, 2.5)]));
    }
}
