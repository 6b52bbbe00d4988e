//! Output artifacts: CSV tables (the canonical format), JSON reports in
//! which every checked number carries its tolerance, and minimal
//! hand-rolled SVG line charts. All files are written atomically
//! (temp + rename) so concurrent writers never interleave.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::barriers::{EllipticReport, ParabolicReport};
use crate::error::Result;
use crate::exhaustion::{EnvelopeReport, ExhibitReport};
use crate::maxprinciple::ComparisonReport;

/// Write atomically: temp file in the target directory, then rename.
pub fn atomic_write(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir)?;
    let mut tmp = PathBuf::from(dir);
    let stem = path
        .file_name()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "out".into());
    tmp.push(format!(".{stem}.tmp.{}", std::process::id()));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Deterministic shortest-round-trip float formatting.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// Simple CSV assembler: header plus rows, `.` decimal, no quoting
/// (the writers only emit comma-free cells).
pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        CsvTable { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_string(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        atomic_write(path, self.to_string().as_bytes())
    }
}

/// A checked quantity: the number and the tolerance it was checked
/// against.
#[derive(Serialize, Clone, Debug)]
pub struct Checked {
    pub value: f64,
    pub tolerance: f64,
}

#[derive(Serialize, Clone, Debug)]
pub struct CertificateJson {
    pub family: String,
    pub params: Vec<(String, f64)>,
    pub density: String,
    pub domain: String,
    pub pass: bool,
    pub min_residual: Checked,
    pub argmin_site: String,
    pub argmin_t: f64,
    pub sites: usize,
}

impl CertificateJson {
    pub fn from_parabolic(report: &ParabolicReport, density: &str) -> Self {
        CertificateJson {
            family: report.family.clone(),
            params: report.params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            density: density.into(),
            domain: report.domain.clone(),
            pass: report.pass,
            min_residual: Checked {
                value: report.min_normalized_residual,
                tolerance: -report.tolerance,
            },
            argmin_site: report.argmin_site.clone(),
            argmin_t: report.argmin_t,
            sites: report.sites,
        }
    }
}

#[derive(Serialize, Clone, Debug)]
pub struct EllipticJson {
    pub family: String,
    pub direction: String,
    pub density: String,
    pub pass: bool,
    pub max_residual: Checked,
    pub argmax: String,
    pub min_value: f64,
    pub sites: usize,
}

impl EllipticJson {
    pub fn from_report(report: &EllipticReport, family: &str, density: &str) -> Self {
        EllipticJson {
            family: family.into(),
            direction: match report.direction {
                crate::barriers::EllipticDirection::BarrierBelowDensity => {
                    "barrier_below_density".into()
                }
                crate::barriers::EllipticDirection::PotentialDecay => "potential_decay".into(),
            },
            density: density.into(),
            pass: report.pass,
            max_residual: Checked { value: report.max_residual, tolerance: report.tolerance },
            argmax: report.argmax.clone(),
            min_value: report.min_value,
            sites: report.sites,
        }
    }
}

#[derive(Serialize, Clone, Debug)]
pub struct WmpJson {
    pub holds: bool,
    pub violation: Checked,
    pub samples: usize,
    pub outcome: String,
}

impl WmpJson {
    pub fn from_report(report: &ComparisonReport) -> Self {
        WmpJson {
            holds: report.holds(),
            violation: Checked { value: report.violation(), tolerance: report.tolerance },
            samples: report.samples,
            outcome: format!("{:?}", report.outcome),
        }
    }
}

#[derive(Serialize, Clone, Debug)]
pub struct EnvelopeJson {
    pub c: f64,
    pub kappa: f64,
    pub t0: f64,
    pub eps: f64,
    pub conditions_ok: bool,
    pub pass: bool,
    pub worst_margin: Checked,
    pub argworst: String,
}

impl EnvelopeJson {
    pub fn from_report(report: &EnvelopeReport, tol: f64) -> Self {
        EnvelopeJson {
            c: report.c,
            kappa: report.kappa,
            t0: report.t0,
            eps: report.eps,
            conditions_ok: report.conditions_ok,
            pass: report.pass,
            worst_margin: Checked { value: report.worst_margin, tolerance: tol },
            argworst: report.argworst.clone(),
        }
    }
}

#[derive(Serialize, Clone, Debug)]
pub struct ExhibitJson {
    pub pass: bool,
    pub threshold: f64,
    pub best_separation: Checked,
    pub initial_identical: bool,
    pub envelope: EnvelopeJson,
    pub cauchy_gap_a: f64,
    pub cauchy_gap_b: f64,
}

impl ExhibitJson {
    pub fn from_report(report: &ExhibitReport) -> Self {
        ExhibitJson {
            pass: report.pass,
            threshold: report.threshold,
            best_separation: Checked {
                value: report.best_separation,
                tolerance: report.threshold,
            },
            initial_identical: report.initial_identical,
            envelope: EnvelopeJson::from_report(&report.envelope, 1e-9),
            cauchy_gap_a: report.cauchy_gap_a,
            cauchy_gap_b: report.cauchy_gap_b,
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    atomic_write(path, text.as_bytes())
}

/// One named line series for the chart.
pub struct Series<'a> {
    pub name: &'a str,
    pub color: &'a str,
    pub points: Vec<(f64, f64)>,
}

/// Minimal hand-rolled SVG line chart (no dependencies): axes, series
/// polylines, and a text legend.
pub fn line_chart_svg(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let w = 640.0;
    let h = 420.0;
    let ml = 70.0;
    let mr = 20.0;
    let mt = 40.0;
    let mb = 50.0;
    let all: Vec<(f64, f64)> = series.iter().flat_map(|s| s.points.iter().copied()).collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in &all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if all.is_empty() {
        x0 = 0.0;
        x1 = 1.0;
        y0 = 0.0;
        y1 = 1.0;
    }
    if (x1 - x0).abs() < 1e-300 {
        x1 = x0 + 1.0;
    }
    if (y1 - y0).abs() < 1e-300 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| ml + (x - x0) / (x1 - x0) * (w - ml - mr);
    let sy = |y: f64| h - mb - (y - y0) / (y1 - y0) * (h - mt - mb);
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" \
         viewBox=\"0 0 {w} {h}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" \
         text-anchor=\"middle\">{title}</text>\n",
        w / 2.0
    ));
    // axes
    svg.push_str(&format!(
        "<line x1=\"{ml}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        h - mb,
        w - mr,
        h - mb
    ));
    svg.push_str(&format!(
        "<line x1=\"{ml}\" y1=\"{mt}\" x2=\"{ml}\" y2=\"{}\" stroke=\"black\"/>\n",
        h - mb
    ));
    // tick labels at the extremes
    svg.push_str(&format!(
        "<text x=\"{ml}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
        h - mb + 16.0,
        fmt_f64(x0)
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" \
         text-anchor=\"end\">{}</text>\n",
        w - mr,
        h - mb + 16.0,
        fmt_f64(x1)
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" \
         text-anchor=\"end\">{}</text>\n",
        ml - 6.0,
        h - mb,
        fmt_f64(y0)
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" \
         text-anchor=\"end\">{}</text>\n",
        ml - 6.0,
        mt + 4.0,
        fmt_f64(y1)
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" \
         text-anchor=\"middle\">{x_label}</text>\n",
        (ml + w - mr) / 2.0,
        h - 12.0
    ));
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" \
         transform=\"rotate(-90 16 {})\">{y_label}</text>\n",
        (mt + h - mb) / 2.0,
        (mt + h - mb) / 2.0
    ));
    for (idx, s) in series.iter().enumerate() {
        let pts: Vec<String> =
            s.points.iter().map(|&(x, y)| format!("{},{}", sx(x), sy(y))).collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            s.color,
            pts.join(" ")
        ));
        let ly = mt + 16.0 * idx as f64;
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{}\" stroke-width=\"2\"/>\n",
            w - mr - 150.0,
            w - mr - 120.0,
            s.color
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
            w - mr - 114.0,
            ly + 4.0,
            s.name
        ));
    }
    svg.push_str("</svg>\n");
    svg
}
