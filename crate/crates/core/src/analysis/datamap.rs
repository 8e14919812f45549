use std::fmt::Write;
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde::Serialize;

use super::svg::{Plot, PALETTE};
use crate::corpus::is_noisy_id;
use crate::dynamics::TdStats;
use crate::error::Result;
use crate::io;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DataMapPoint {
    pub example_id: String,
    pub variability: f64,
    pub confidence: f64,
    pub correctness: usize,
    pub noisy: bool,
}

pub fn datamap_points(stats: &IndexMap<String, TdStats>) -> Vec<DataMapPoint> {
    stats
        .values()
        .map(|s| DataMapPoint {
            example_id: s.example_id.clone(),
            variability: s.variability,
            confidence: s.confidence,
            correctness: s.correctness,
            noisy: is_noisy_id(&s.example_id),
        })
        .collect()
}

pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn datamap_csv(points: &[DataMapPoint]) -> String {
    let mut out = String::from("example_id,variability,confidence,correctness,noisy\n");
    for p in points {
        writeln!(
            out,
            "{},{},{},{},{}",
            csv_field(&p.example_id),
            p.variability,
            p.confidence,
            p.correctness,
            p.noisy
        )
        .unwrap();
    }
    out
}

/// Variability on x (0 to 0.5), confidence on y (0 to 1), one color per
/// correctness value.
pub fn datamap_svg(points: &[DataMapPoint]) -> String {
    let mut plot = Plot::new("Data map", "variability", "confidence", (0.0, 0.5), (0.0, 1.0));
    let max_corr = points.iter().map(|p| p.correctness).max().unwrap_or(0);
    let color = |c: usize| PALETTE[c % PALETTE.len()];
    for p in points {
        plot.point(p.variability, p.confidence, color(p.correctness));
    }
    for c in 0..=max_corr {
        if points.iter().any(|p| p.correctness == c) {
            plot.legend_entry(&format!("correct {c}"), color(c));
        }
    }
    plot.render()
}

/// Write `datamap.csv` and `datamap.svg` into `out_dir`.
pub fn datamap_export(stats: &IndexMap<String, TdStats>, out_dir: &Path) -> Result<(PathBuf, PathBuf)> {
    let points = datamap_points(stats);
    let csv = out_dir.join("datamap.csv");
    let svg = out_dir.join("datamap.svg");
    io::write_text(&csv, &datamap_csv(&points))?;
    io::write_text(&svg, &datamap_svg(&points))?;
    Ok((csv, svg))
}
