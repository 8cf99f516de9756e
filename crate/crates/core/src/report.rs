//! Summary CSV and spider-plot SVG output.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::harness::{write_atomic, Characteristic};
use crate::optimizers::AlgorithmId;
use crate::stats::{mu_pairs, RobustnessSummary};

pub const SUMMARY_HEADER: &str = "algorithm,characteristic,tuned,mu,sigma";

const CANVAS: f64 = 600.0;
const CENTER_X: f64 = 300.0;
const CENTER_Y: f64 = 320.0;
const RADIUS: f64 = 200.0;
const SERIES: [(&str, &str); 2] = [("Untuned", "#d62728"), ("Tuned", "#1f77b4")];

/// One parsed line of a summary CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub algorithm: AlgorithmId,
    pub characteristic: Characteristic,
    pub tuned: bool,
    pub mu: f64,
    pub sigma: f64,
}

/// Rounds to six significant digits and prints the shortest form.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let rounded: f64 = format!("{x:.5e}").parse().expect("formatted float parses");
    format!("{rounded}")
}

pub fn summary_csv(rows: &[RobustnessSummary]) -> String {
    let mut sorted: Vec<&RobustnessSummary> = rows.iter().collect();
    sorted.sort_by(|a, b| {
        (a.algorithm.as_str(), a.characteristic.as_str(), a.tuned).cmp(&(
            b.algorithm.as_str(),
            b.characteristic.as_str(),
            b.tuned,
        ))
    });
    let mut text = format!("{SUMMARY_HEADER}\n");
    for r in sorted {
        let _ = writeln!(
            text,
            "{},{},{},{},{}",
            r.algorithm,
            r.characteristic,
            r.tuned,
            sig6(r.mu),
            sig6(r.sigma)
        );
    }
    text
}

pub fn emit_summary_csv(rows: &[RobustnessSummary], path: &Path) -> Result<()> {
    write_atomic(path, &summary_csv(rows))
}

pub fn parse_summary_csv(text: &str) -> Result<Vec<SummaryRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(SUMMARY_HEADER) {
        return Err(Error::parse("summary csv", "bad header"));
    }
    lines
        .filter(|l| !l.is_empty())
        .map(|line| {
            let bad = || Error::parse("summary csv", format!("bad row '{line}'"));
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 5 {
                return Err(bad());
            }
            Ok(SummaryRow {
                algorithm: f[0].parse()?,
                characteristic: f[1].parse()?,
                tuned: f[2].parse().map_err(|_| bad())?,
                mu: f[3].parse().map_err(|_| bad())?,
                sigma: f[4].parse().map_err(|_| bad())?,
            })
        })
        .collect()
}

/// Distance from the origin for a mean error: 1 at zero error, shrinking
/// towards 0 as the error grows.
pub fn radial(mu: f64) -> Result<f64> {
    if mu.is_nan() || mu < 0.0 {
        return Err(Error::InvalidInput(format!("mean error must be non-negative, got {mu}")));
    }
    Ok(1.0 / (1.0 + 10.0 * mu))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpiderPlotModel {
    pub algorithm: AlgorithmId,
    pub axes: [Characteristic; 5],
    pub untuned: [f64; 5],
    pub tuned: [f64; 5],
}

impl SpiderPlotModel {
    pub fn from_summaries(algorithm: AlgorithmId, summaries: &[RobustnessSummary]) -> Result<Self> {
        let own: Vec<RobustnessSummary> = summaries
            .iter()
            .filter(|s| s.algorithm == algorithm)
            .cloned()
            .collect();
        let pairs = mu_pairs(&own)?;
        let mut model = SpiderPlotModel {
            algorithm,
            axes: Characteristic::ALL,
            untuned: [0.0; 5],
            tuned: [0.0; 5],
        };
        for (i, &(_, u, t)) in pairs.iter().enumerate() {
            model.untuned[i] = radial(u)?;
            model.tuned[i] = radial(t)?;
        }
        Ok(model)
    }

    fn validate(&self) -> Result<()> {
        if self
            .untuned
            .iter()
            .chain(&self.tuned)
            .any(|r| !(*r > 0.0 && *r <= 1.0))
        {
            return Err(Error::InvalidInput("radial values must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

fn point(axis: usize, r: f64) -> (f64, f64) {
    let angle = (-90.0 + 72.0 * axis as f64).to_radians();
    (CENTER_X + RADIUS * r * angle.cos(), CENTER_Y + RADIUS * r * angle.sin())
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn spider_svg(model: &SpiderPlotModel) -> Result<String> {
    model.validate()?;
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{CANVAS}" height="{CANVAS}" viewBox="0 0 {CANVAS} {CANVAS}">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{CANVAS}" height="{CANVAS}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{CENTER_X}" y="30" text-anchor="middle" font-family="sans-serif" font-size="18">Summary of results for {}</text>"#,
        escape(model.algorithm.full_name())
    );
    for ring in [0.25, 0.5, 0.75, 1.0] {
        let _ = writeln!(
            s,
            r##"<circle cx="{CENTER_X}" cy="{CENTER_Y}" r="{:.2}" fill="none" stroke="#cccccc" stroke-width="1"/>"##,
            RADIUS * ring
        );
    }
    for (i, axis) in model.axes.iter().enumerate() {
        let (x, y) = point(i, 1.0);
        let _ = writeln!(
            s,
            r##"<line x1="{CENTER_X}" y1="{CENTER_Y}" x2="{x:.2}" y2="{y:.2}" stroke="#888888" stroke-width="1"/>"##
        );
        let (lx, ly) = point(i, 1.12);
        let _ = writeln!(
            s,
            r#"<text x="{lx:.2}" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="13">{}</text>"#,
            ly + 4.0,
            escape(axis.label())
        );
    }
    for ((name, color), values) in SERIES.iter().zip([&model.untuned, &model.tuned]) {
        let points: Vec<String> = values
            .iter()
            .enumerate()
            .map(|(i, &r)| {
                let (x, y) = point(i, r);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(
            s,
            r#"<polygon class="{}" points="{}" fill="{color}" fill-opacity="0.15" stroke="{color}" stroke-width="2"/>"#,
            name.to_ascii_lowercase(),
            points.join(" ")
        );
    }
    for (i, (name, color)) in SERIES.iter().enumerate() {
        let y = 60.0 + 22.0 * i as f64;
        let _ = writeln!(s, r#"<rect x="460" y="{}" width="14" height="14" fill="{color}"/>"#, y - 11.0);
        let _ = writeln!(
            s,
            r#"<text x="482" y="{y}" font-family="sans-serif" font-size="13">{name}</text>"#
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn emit_spider_svg(model: &SpiderPlotModel, path: &Path) -> Result<()> {
    write_atomic(path, &spider_svg(model)?)
}

/// Writes `summary.csv` and one plot per algorithm under `out`; returns the
/// written paths.
pub fn emit_report(out: &Path, rows: &[RobustnessSummary], algorithms: &[AlgorithmId]) -> Result<Vec<PathBuf>> {
    let csv = out.join("summary.csv");
    emit_summary_csv(rows, &csv)?;
    let mut written = vec![csv];
    for &alg in algorithms {
        let path = out.join("plots").join(format!("{alg}.svg"));
        emit_spider_svg(&SpiderPlotModel::from_summaries(alg, rows)?, &path)?;
        written.push(path);
    }
    Ok(written)
}
