//! CSV, JSON and SVG output of risk reports, and the run manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::risk_harness::{lemma1_check, Lemma1Report, MaxisetVerdict, RiskReport, Verdict};

pub const CSV_HEADER: &str = "n,h,risk,std_error,bias_sup,variance_risk,psi,ratio";

/// Decimal rendering with 12 significant digits. Scientific notation is
/// used outside `[1e-5, 1e12)`.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.11e}");
    let exp: i32 = sci[sci.find('e').expect("exponent") + 1..]
        .parse()
        .expect("integer exponent");
    if (-5..12).contains(&exp) {
        format!("{:.*}", (11 - exp) as usize, x)
    } else {
        sci
    }
}

fn check_nonempty(report: &RiskReport) -> Result<()> {
    if report.rows.is_empty() {
        Err(Error::Validation(format!("report '{}' has no rows", report.name)))
    } else {
        Ok(())
    }
}

pub fn csv_string(report: &RiskReport) -> Result<String> {
    check_nonempty(report)?;
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &report.rows {
        let cells = [r.h, r.risk, r.std_error, r.bias_sup, r.variance_risk, r.psi, r.ratio];
        let _ = write!(out, "{}", r.n);
        for c in cells {
            let _ = write!(out, ",{}", fmt_sig(c));
        }
        out.push('\n');
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct SelectionRow {
    pub n: u64,
    pub counts: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary<'a> {
    pub name: &'a str,
    pub function: &'a str,
    pub fitted_exponent: Option<f64>,
    pub target_exponent: f64,
    pub verdict: Option<Verdict>,
    pub channels: Option<&'a MaxisetVerdict>,
    pub betas: Option<&'a [f64]>,
    pub c1: Option<f64>,
    pub selections: Option<Vec<SelectionRow>>,
    pub lemma1: Lemma1Report,
}

pub fn summary<'a>(report: &'a RiskReport, channels: Option<&'a MaxisetVerdict>) -> Result<Summary<'a>> {
    check_nonempty(report)?;
    let selections = report.betas.as_ref().map(|_| {
        report
            .rows
            .iter()
            .map(|r| SelectionRow {
                n: r.n,
                counts: r.selections.clone().unwrap_or_default(),
            })
            .collect()
    });
    Ok(Summary {
        name: &report.name,
        function: &report.function,
        fitted_exponent: report.fitted_exponent,
        target_exponent: report.target_exponent,
        verdict: channels.map(|c| c.verdict).or(report.verdict),
        channels,
        betas: report.betas.as_deref(),
        c1: report.c1,
        selections,
        lemma1: lemma1_check(report),
    })
}

pub fn summary_json(report: &RiskReport, channels: Option<&MaxisetVerdict>) -> Result<String> {
    let s = summary(report, channels)?;
    Ok(serde_json::to_string_pretty(&s).expect("summary serializes") + "\n")
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;

/// Log-log plot of risk against `log n / n`: one `class="data"` polyline per
/// report and one `class="reference"` polyline for `psi_n^p` of the first
/// report, anchored at its first risk value.
pub fn svg_plot(reports: &[&RiskReport]) -> Result<String> {
    let first = *reports
        .first()
        .ok_or_else(|| Error::Validation("nothing to plot".into()))?;
    for r in reports {
        check_nonempty(r)?;
    }
    let x_of = |n: u64| ((n as f64).ln() / n as f64).log10();
    let anchor = first.rows[0].risk / first.rows[0].psi.powf(first.p);
    let reference: Vec<(f64, f64)> = first
        .rows
        .iter()
        .map(|r| (x_of(r.n), (anchor * r.psi.powf(first.p)).log10()))
        .collect();
    let series: Vec<Vec<(f64, f64)>> = reports
        .iter()
        .map(|rep| {
            rep.rows
                .iter()
                .filter(|r| r.risk > 0.0)
                .map(|r| (x_of(r.n), r.risk.log10()))
                .collect()
        })
        .collect();
    let all = series.iter().flatten().chain(&reference);
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let span = |a: f64, b: f64| if b > a { b - a } else { 1.0 };
    let (sx, sy) = (span(x0, x1), span(y0, y1));
    let px = |x: f64| MARGIN + (x - x0) / sx * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) / sy * (HEIGHT - 2.0 * MARGIN);
    let points = |pts: &[(f64, f64)]| {
        pts.iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r##"<g stroke="#444" stroke-width="1"><line x1="{m}" y1="{b}" x2="{r}" y2="{b}"/><line x1="{m}" y1="{m}" x2="{m}" y2="{b}"/></g>"##,
        m = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">log10(log n / n)  [{x0:.2}, {x1:.2}]</text>"#,
        WIDTH / 2.0,
        HEIGHT - 20.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{}" font-size="12" transform="rotate(-90 16 {})" text-anchor="middle">log10 risk  [{y0:.2}, {y1:.2}]</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    let _ = writeln!(
        svg,
        r##"<polyline class="reference" fill="none" stroke="#999" stroke-dasharray="6 4" points="{}"/>"##,
        points(&reference)
    );
    for (rep, pts) in reports.iter().zip(&series) {
        let _ = writeln!(
            svg,
            r##"<polyline class="data" fill="none" stroke="#1f77b4" stroke-width="2" points="{}"><title>{}</title></polyline>"##,
            points(pts),
            rep.name
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmittedPaths {
    pub name: String,
    pub csv: PathBuf,
    pub json: PathBuf,
    pub svg: Option<PathBuf>,
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io(format!("cannot write {}: {e}", path.display())))
}

/// Writes `<stem>.csv`, `<stem>.json` and optionally `<stem>.svg` into `dir`.
pub fn emit_report(
    report: &RiskReport,
    channels: Option<&MaxisetVerdict>,
    dir: &Path,
    svg: bool,
) -> Result<EmittedPaths> {
    check_nonempty(report)?;
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("cannot create {}: {e}", dir.display())))?;
    let csv = dir.join(format!("{}.csv", report.name));
    let json = dir.join(format!("{}.json", report.name));
    write(&csv, &csv_string(report)?)?;
    write(&json, &summary_json(report, channels)?)?;
    let svg = if svg {
        let path = dir.join(format!("{}.svg", report.name));
        write(&path, &svg_plot(&[report])?)?;
        Some(path)
    } else {
        None
    };
    Ok(EmittedPaths {
        name: report.name.clone(),
        csv,
        json,
        svg,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub version: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub experiments: Vec<EmittedPaths>,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl RunManifest {
    pub fn new(config_hash: String) -> Self {
        Self {
            config_hash,
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            experiments: Vec::new(),
            status: "running".into(),
            message: None,
        }
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join("manifest.json");
        write(&path, &(serde_json::to_string_pretty(self).expect("manifest serializes") + "\n"))?;
        Ok(path)
    }
}
