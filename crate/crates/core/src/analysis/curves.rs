use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::svg::{Plot, PALETTE};
use crate::error::{Error, Result};
use crate::trainer::RunLog;

/// Steps-to-best of a curriculum run relative to a reference run.
pub fn time_ratio(log: &RunLog, reference: &RunLog) -> Result<f64> {
    let num = log.best_step().ok_or(Error::Empty("run log (no validation record)"))?;
    let den = reference
        .best_step()
        .ok_or(Error::Empty("reference run log (no validation record)"))?;
    if den == 0 {
        return Err(Error::Undefined("reference best step is zero".into()));
    }
    Ok(num as f64 / den as f64)
}

/// Per-seed time ratios summarized by their mean and minimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeRatioSummary {
    pub ratios: Vec<f64>,
    pub mean: f64,
    pub min: f64,
}

/// Pair logs seed by seed and summarize the ratios.
pub fn time_ratio_summary(logs: &[RunLog], references: &[RunLog]) -> Result<TimeRatioSummary> {
    if logs.len() != references.len() {
        return Err(Error::Mismatch(format!("{} runs vs {} reference runs", logs.len(), references.len())));
    }
    if logs.is_empty() {
        return Err(Error::Empty("run list"));
    }
    let ratios = logs
        .iter()
        .zip(references)
        .map(|(l, r)| time_ratio(l, r))
        .collect::<Result<Vec<_>>>()?;
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(TimeRatioSummary { ratios, mean, min })
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    // shifted by the first value so identical inputs reproduce it exactly
    let mean = values[0] + values.iter().map(|v| v - values[0]).sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub step: usize,
    pub mean: f64,
    pub std: f64,
}

/// Mean and standard deviation across runs at each logged step. All runs
/// must log the metric at the same steps.
pub fn learning_curve(logs: &[RunLog], metric: &str, split: &str) -> Result<Vec<CurvePoint>> {
    let series: Vec<Vec<(usize, f64)>> = logs.iter().map(|l| l.series(split, metric)).collect();
    let first = series.first().ok_or(Error::Empty("run list"))?;
    for (r, s) in series.iter().enumerate().skip(1) {
        if s.len() != first.len() {
            return Err(Error::Mismatch(format!(
                "run {r} logs {} {split}/{metric} points, run 0 logs {}",
                s.len(),
                first.len()
            )));
        }
        if let Some(((a, _), (b, _))) = first.iter().zip(s).find(|((a, _), (b, _))| a != b) {
            return Err(Error::Mismatch(format!("evaluation grids diverge at step {a} (run {r} has {b})")));
        }
    }
    Ok(first
        .iter()
        .enumerate()
        .map(|(k, &(step, _))| {
            let vals: Vec<f64> = series.iter().map(|s| s[k].1).collect();
            let (mean, std) = mean_std(&vals);
            CurvePoint { step, mean, std }
        })
        .collect())
}

pub fn curve_csv(points: &[CurvePoint]) -> String {
    let mut out = String::from("step,mean,std\n");
    for p in points {
        writeln!(out, "{},{},{}", p.step, p.mean, p.std).unwrap();
    }
    out
}

/// One line per named curve (mean only).
pub fn curves_svg(title: &str, y_label: &str, curves: &[(&str, &[CurvePoint])]) -> String {
    let all = curves.iter().flat_map(|(_, c)| c.iter());
    let (mut x_hi, mut y_lo, mut y_hi) = (1.0f64, f64::INFINITY, f64::NEG_INFINITY);
    for p in all {
        x_hi = x_hi.max(p.step as f64);
        y_lo = y_lo.min(p.mean);
        y_hi = y_hi.max(p.mean);
    }
    if !y_lo.is_finite() {
        (y_lo, y_hi) = (0.0, 1.0);
    }
    let mut plot = Plot::new(title, "step", y_label, (0.0, x_hi), (y_lo, y_hi));
    for (i, (name, c)) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<(f64, f64)> = c.iter().map(|p| (p.step as f64, p.mean)).collect();
        plot.polyline(&pts, color);
        plot.legend_entry(name, color);
    }
    plot.render()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trainer::{ACCURACY, VALIDATION};

    fn log(best: usize) -> RunLog {
        let mut l = RunLog::new();
        l.push(best / 2, VALIDATION, ACCURACY, 0.5);
        l.push(best, VALIDATION, ACCURACY, 0.9);
        l.push(best * 2, VALIDATION, ACCURACY, 0.8);
        l
    }

    fn curve_log(values: &[(usize, f64)]) -> RunLog {
        let mut l = RunLog::new();
        for &(s, v) in values {
            l.push(s, VALIDATION, ACCURACY, v);
        }
        l
    }

    #[test]
    fn ratio_examples() {
        assert_eq!(time_ratio(&log(700), &log(700)).unwrap(), 1.0);
        assert_eq!(time_ratio(&log(560), &log(1000)).unwrap(), 0.56);
        let empty = RunLog::new();
        assert!(time_ratio(&log(5), &empty).is_err());
        assert!(time_ratio(&log(5), &curve_log(&[(0, 0.5)])).is_err());
    }

    #[test]
    fn ratio_summary_mean_and_min() {
        let s = time_ratio_summary(&[log(500), log(600), log(1000)], &[log(1000), log(1000), log(1000)]).unwrap();
        assert_eq!(s.ratios, [0.5, 0.6, 1.0]);
        assert!((s.mean - 0.7).abs() < 1e-15);
        assert_eq!(s.min, 0.5);
    }

    #[test]
    fn curve_statistics() {
        let single = learning_curve(&[curve_log(&[(1, 0.3), (2, 0.6)])], ACCURACY, VALIDATION).unwrap();
        assert!(single.iter().all(|p| p.std == 0.0));
        let a = curve_log(&[(1, 0.5), (2, 0.2)]);
        let b = curve_log(&[(1, 0.7), (2, 0.2)]);
        let c = learning_curve(&[a.clone(), b], ACCURACY, VALIDATION).unwrap();
        assert!((c[0].mean - 0.6).abs() < 1e-15);
        assert!((c[0].std - 0.1).abs() < 1e-15);
        assert_eq!(c[1].std, 0.0);
        let same = learning_curve(&[a.clone(), a.clone(), a.clone()], ACCURACY, VALIDATION).unwrap();
        assert_eq!(same[1].mean, 0.2);
    }

    #[test]
    fn mismatched_grids_name_the_step() {
        let a = curve_log(&[(10, 0.5), (20, 0.2)]);
        let b = curve_log(&[(10, 0.7), (25, 0.2)]);
        let err = learning_curve(&[a, b], ACCURACY, VALIDATION).unwrap_err();
        assert!(err.to_string().contains("step 20"), "{err}");
    }

    #[test]
    fn curve_outputs() {
        let c = learning_curve(&[curve_log(&[(1, 0.5), (2, 0.75)])], ACCURACY, VALIDATION).unwrap();
        assert_eq!(curve_csv(&c), "step,mean,std\n1,0.5,0\n2,0.75,0\n");
        assert!(curves_svg("t", "acc", &[("random", &c)]).contains("<polyline"));
    }
}
