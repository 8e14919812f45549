use serde::{Deserialize, Serialize};

use crate::difficulty::DifficultyScores;
use crate::error::{Error, Result};

/// 1-based ranks with ties given their average rank.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && xs[idx[end]] == xs[idx[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let avg = (start + 1 + end) as f64 / 2.0;
        for &i in &idx[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    ranks
}

pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::Mismatch(format!("lengths {} and {}", xs.len(), ys.len())));
    }
    if xs.is_empty() {
        return Err(Error::Empty("correlation input"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Undefined("correlation of a constant sequence".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman's rho: Pearson correlation of average ranks.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::Mismatch(format!("lengths {} and {}", xs.len(), ys.len())));
    }
    pearson(&average_ranks(xs), &average_ranks(ys))
}

/// Area under the ROC curve of `scores` for detecting `positives`
/// (Mann-Whitney, ties count one half).
pub fn roc_auc(scores: &[f64], positives: &[bool]) -> Result<f64> {
    if scores.len() != positives.len() {
        return Err(Error::Mismatch("scores and labels differ in length".into()));
    }
    let n_pos = positives.iter().filter(|&&p| p).count();
    let n_neg = positives.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::Undefined("AUC needs both positives and negatives".into()));
    }
    let ranks = average_ranks(scores);
    let rank_sum: f64 = ranks.iter().zip(positives).filter(|(_, &p)| p).map(|(r, _)| r).sum();
    let u = rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos * n_neg) as f64)
}

/// Symmetric matrix of pairwise Spearman correlations between metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub metrics: Vec<String>,
    pub rho: Vec<Vec<f64>>,
}

impl CorrelationMatrix {
    /// Correlate every pair of score sets over the ids of the first one.
    /// Scores are used as stored, regardless of orientation.
    pub fn from_scores(sets: &[&DifficultyScores]) -> Result<Self> {
        let first = sets.first().ok_or(Error::Empty("metric list"))?;
        let columns = sets
            .iter()
            .map(|s| {
                first
                    .scores
                    .keys()
                    .map(|id| {
                        s.get(id)
                            .ok_or_else(|| Error::MissingExample(id.clone(), "a compared metric"))
                    })
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let k = sets.len();
        let mut rho = vec![vec![1.0; k]; k];
        for i in 0..k {
            for j in i + 1..k {
                let r = spearman(&columns[i], &columns[j])?;
                rho[i][j] = r;
                rho[j][i] = r;
            }
        }
        Ok(CorrelationMatrix {
            metrics: sets.iter().map(|s| s.metric_name.clone()).collect(),
            rho,
        })
    }

    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.metrics.iter().position(|m| m == a)?;
        let j = self.metrics.iter().position(|m| m == b)?;
        Some(self.rho[i][j])
    }
}
