use rand::Rng;

use crate::error::{Error, Result};
use crate::seed;

pub const DEFAULT_ROUNDS: usize = 10_000;

/// Paired approximate-randomization test on per-unit correctness.
///
/// The statistic is `|mean(a) - mean(b)|`. Each round swaps the two
/// outcomes of every unit with probability 1/2; the p-value is
/// `(rounds with statistic >= observed + 1) / (rounds + 1)`.
pub fn approx_randomization(a: &[bool], b: &[bool], rounds: usize, seed: u64) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Mismatch(format!(
            "systems cover {} and {} units",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::Empty("unit list"));
    }
    if rounds == 0 {
        return Err(Error::config("rounds", "must be positive"));
    }
    // Units where both systems agree never change the statistic, so only
    // the signed differences of disagreeing units are shuffled. Working in
    // integer sums keeps ties exact.
    let diffs: Vec<i64> = a
        .iter()
        .zip(b)
        .filter(|(x, y)| x != y)
        .map(|(&x, _)| if x { 1 } else { -1 })
        .collect();
    let observed = diffs.iter().sum::<i64>().abs();
    let mut rng = seed::rng(seed);
    let mut hits = 0usize;
    for _ in 0..rounds {
        let s: i64 = diffs
            .iter()
            .map(|&d| if rng.random::<bool>() { -d } else { d })
            .sum();
        if s.abs() >= observed {
            hits += 1;
        }
    }
    Ok((hits + 1) as f64 / (rounds + 1) as f64)
}
