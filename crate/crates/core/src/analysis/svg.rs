//! Minimal static SVG plots: axes with ticks, points, polylines, a legend.

use std::fmt::Write;

pub const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

#[derive(Debug, Clone)]
pub struct Plot {
    width: f64,
    height: f64,
    margin: f64,
    x_range: (f64, f64),
    y_range: (f64, f64),
    title: String,
    x_label: String,
    y_label: String,
    body: String,
    legend: Vec<(String, String)>,
}

impl Plot {
    pub fn new(title: &str, x_label: &str, y_label: &str, x_range: (f64, f64), y_range: (f64, f64)) -> Self {
        let widen = |(lo, hi): (f64, f64)| if hi > lo { (lo, hi) } else { (lo - 0.5, lo + 0.5) };
        Plot {
            width: 640.0,
            height: 480.0,
            margin: 60.0,
            x_range: widen(x_range),
            y_range: widen(y_range),
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            body: String::new(),
            legend: Vec::new(),
        }
    }

    fn px(&self, x: f64) -> f64 {
        let (lo, hi) = self.x_range;
        self.margin + (x - lo) / (hi - lo) * (self.width - 2.0 * self.margin)
    }

    fn py(&self, y: f64) -> f64 {
        let (lo, hi) = self.y_range;
        self.height - self.margin - (y - lo) / (hi - lo) * (self.height - 2.0 * self.margin)
    }

    pub fn point(&mut self, x: f64, y: f64, color: &str) {
        let (cx, cy) = (self.px(x), self.py(y));
        writeln!(
            self.body,
            r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="2.5" fill="{color}" fill-opacity="0.6"/>"#
        )
        .unwrap();
    }

    pub fn polyline(&mut self, points: &[(f64, f64)], color: &str) {
        let coords: Vec<String> = points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", self.px(x), self.py(y)))
            .collect();
        writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            coords.join(" ")
        )
        .unwrap();
    }

    pub fn legend_entry(&mut self, label: &str, color: &str) {
        self.legend.push((label.into(), color.into()));
    }

    pub fn render(&self) -> String {
        let (w, h, m) = (self.width, self.height, self.margin);
        let mut s = String::new();
        writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
        writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="11">"#
        )
        .unwrap();
        writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#).unwrap();
        writeln!(s, r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="14">{}</text>"#, w / 2.0, escape(&self.title)).unwrap();
        writeln!(
            s,
            r#"<line x1="{m}" y1="{0}" x2="{1}" y2="{0}" stroke="black"/><line x1="{m}" y1="{m}" x2="{m}" y2="{0}" stroke="black"/>"#,
            h - m,
            w - m
        )
        .unwrap();
        for k in 0..=5 {
            let f = k as f64 / 5.0;
            let xv = self.x_range.0 + f * (self.x_range.1 - self.x_range.0);
            let yv = self.y_range.0 + f * (self.y_range.1 - self.y_range.0);
            let (x, y) = (self.px(xv), self.py(yv));
            writeln!(
                s,
                r#"<line x1="{x:.2}" y1="{0}" x2="{x:.2}" y2="{1}" stroke="black"/><text x="{x:.2}" y="{2}" text-anchor="middle">{3}</text>"#,
                h - m,
                h - m + 5.0,
                h - m + 18.0,
                tick(xv)
            )
            .unwrap();
            writeln!(
                s,
                r#"<line x1="{0}" y1="{y:.2}" x2="{m}" y2="{y:.2}" stroke="black"/><text x="{1}" y="{2:.2}" text-anchor="end">{3}</text>"#,
                m - 5.0,
                m - 8.0,
                y + 4.0,
                tick(yv)
            )
            .unwrap();
        }
        writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, w / 2.0, h - 15.0, escape(&self.x_label)).unwrap();
        writeln!(
            s,
            r#"<text x="15" y="{0:.1}" text-anchor="middle" transform="rotate(-90 15 {0:.1})">{1}</text>"#,
            h / 2.0,
            escape(&self.y_label)
        )
        .unwrap();
        s.push_str(&self.body);
        for (i, (label, color)) in self.legend.iter().enumerate() {
            let y = m + 14.0 * i as f64;
            writeln!(
                s,
                r#"<rect x="{0}" y="{1:.1}" width="10" height="10" fill="{color}"/><text x="{2}" y="{3:.1}">{4}</text>"#,
                w - m + 5.0,
                y,
                w - m + 19.0,
                y + 9.0,
                escape(label)
            )
            .unwrap();
        }
        s.push_str("</svg>\n");
        s
    }
}

fn tick(v: f64) -> String {
    if v.abs() >= 100.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn top_left_is_min_x_max_y() {
        let p = Plot::new("t", "x", "y", (0.0, 0.5), (0.0, 1.0));
        assert_eq!(p.px(0.0), 60.0);
        assert_eq!(p.py(1.0), 60.0);
        let svg = p.render();
        assert!(svg.starts_with("<?xml"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}
